/** Raised when a request is well-formed on the wire but a model cannot
 * accept its content (bad audio encoding, oversized batch, ...).  The HTTP
 * layer maps it to a 400; anything else becomes a 500. */
export class ModelInputError extends Error {}
