import { AddressInfo } from "node:net";

import { createApp } from "./app.js";
import { ConfigError, parseConfig, usage } from "./config.js";
import { capabilities, loadModels } from "./models.js";

function fail(message: string): never {
  console.error(`vrag-sidecar: ${message}`);
  process.exit(1);
}

let config;
try {
  config = parseConfig(process.argv.slice(2));
} catch (err) {
  if (err instanceof ConfigError) fail(err.message);
  throw err;
}
if (config.help) {
  console.log(usage());
  process.exit(0);
}

let models;
try {
  models = loadModels(config);
} catch (err) {
  if (err instanceof ConfigError) fail(err.message);
  throw err;
}

const app = createApp(models, config);
const server = app.listen(config.port, config.host, () => {
  const { port } = server.address() as AddressInfo;
  console.log(
    `listening on http://${config.host}:${port} ` +
      `capabilities=${JSON.stringify(capabilities(models))}`,
  );
});
server.on("error", (err) => fail(`cannot bind ${config.host}:${config.port}: ${err.message}`));
