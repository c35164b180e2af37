"""Prompt templates used across indexing, retrieval, generation, and evaluation.

Kept in one module so tests can assert against exact strings and operators can
review every instruction the engine sends to a model.
"""

from __future__ import annotations

RECORD_SEP = "##"
FIELD_SEP = "<|>"
COMPLETION_TAG = "<|COMPLETE|>"

EXTRACTION_SYSTEM = (
    "You extract a knowledge graph from text. Identify key entities and the "
    "meaningful relationships between them."
)

EXTRACTION_TEMPLATE = """Extract all key entities and relationships from the text below.

For each entity output one record:
("entity"{field_sep}<entity_name>{field_sep}<entity_type>{field_sep}<entity_description>)
For each relationship between two extracted entities output one record:
("relation"{field_sep}<source_entity>{field_sep}<target_entity>{field_sep}<relationship_description>)

Separate records with "{record_sep}" and finish with {completion_tag}.

Text:
{text}
"""

SYNTHESIS_TEMPLATE = """Merge the following description fragments of the entity "{name}" into one \
coherent description. Keep every distinct fact, drop repetition, and answer with \
the description only.

Fragments:
{fragments}
"""

CAPTION_INSTRUCTION = (
    "Describe objects, actions, and scene dynamics in these frames; the "
    "clip's speech transcript is provided for context."
)

RECAPTION_INSTRUCTION_TEMPLATE = (
    "Describe objects, actions, and scene dynamics in these frames in detail, "
    "paying particular attention to anything related to: {keywords}. The "
    "clip's speech transcript is provided for context."
)

REFORMULATE_TEMPLATE = """Rewrite the question below as a single declarative sentence stating the \
information it asks for. Answer with the sentence only.

Question: {query}
"""

SCENE_QUERY_TEMPLATE = """Describe the visual scene one would expect to see in a video relevant to \
the question below: the setting, objects, and actions. Answer with the scene \
description only.

Question: {query}
"""

KEYWORD_TEMPLATE = """List the key search terms in the question below as a comma-separated list. \
Answer with the list only.

Question: {query}
"""

JUDGE_RELEVANCE_TEMPLATE = """Decide whether the video clip described below could help answer the \
question. Reply with YES or NO on the first line, then a short reason.

Question: {query}

Clip caption:
{caption}

Clip transcript:
{transcript}
"""

ANSWER_TEMPLATE = """Answer the question using the evidence below. Ground every claim in the \
VIDEO EVIDENCE or TEXT EVIDENCE sections; if the evidence is insufficient, \
say so rather than guessing.

{context}

Question: {query}

Answer:"""

_CRITERIA_BLOCK = """\
- **Comprehensiveness**: How much detail does the answer provide to cover all aspects and details of the question?
- **Empowerment**: How well does the answer help the reader understand and make informed judgments about the topic?
- **Trustworthiness**: Does the answer provide sufficient detail and align with common knowledge, enhancing its credibility?
- **Depth**: Does the answer provide in-depth analysis or details, rather than just superficial information?
- **Density**: Does the answer contain relevant information without less informative or redundant content?"""

WINRATE_JUDGE_TEMPLATE = """You will evaluate two answers to the same question based on these criteria: **Comprehensiveness**, **Empowerment**, **Trustworthiness**, **Depth** and **Density**.

""" + _CRITERIA_BLOCK + """
For each criterion, choose the better answer (either Answer 1 or Answer 2) and explain why. Then, select an overall winner based on these criteria.

Here is the question:
{query}

Here are the two answers:

**Answer 1:**
{answer1}

**Answer 2:**
{answer2}

Evaluate both answers using the criteria listed above and provide detailed explanations for each criterion.
Output your evaluation in the following JSON format:

{{
    "Comprehensiveness": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}},
    "Empowerment": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}},
    "Trustworthiness": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}},
    "Depth": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}},
    "Density": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}},
    "Overall": {{"Winner": "Answer 1 or Answer 2", "Explanation": "..."}}
}}"""

QUANTITATIVE_JUDGE_TEMPLATE = """You are an expert evaluating an answer against a baseline answer based on these criteria: **Comprehensiveness**, **Empowerment**, **Trustworthiness**, **Depth** and **Density**.

""" + _CRITERIA_BLOCK + """
For the evaluated answer labeled "Evaluation Answer," assign a score from 1 to 5 for each criterion compared to the baseline answer labeled "Baseline Answer." Then, assign an overall score based on these criteria.
The evaluation scores are defined as follows:
- 1: Strongly worse than the baseline answer
- 2: Weakly worse than the baseline answer
- 3: Moderate compared to the baseline answer
- 4: Weakly better than the baseline answer
- 5: Strongly better than the baseline answer

Here is the question:
{query}

Here are the answers:

**Baseline Answer:**
{baseline_answer}

**Evaluation Answer:**
{evaluation_answer}

Evaluate the answer using the criteria listed above and provide detailed explanations for the scores.
Output your evaluation in the following JSON format:

{{
    "Comprehensiveness": {{"Score": 1, "Explanation": "..."}},
    "Empowerment": {{"Score": 1, "Explanation": "..."}},
    "Trustworthiness": {{"Score": 1, "Explanation": "..."}},
    "Depth": {{"Score": 1, "Explanation": "..."}},
    "Density": {{"Score": 1, "Explanation": "..."}},
    "Overall": {{"Score": 1, "Explanation": "..."}}
}}"""


def extraction_prompt(text: str) -> str:
    return EXTRACTION_TEMPLATE.format(
        field_sep=FIELD_SEP, record_sep=RECORD_SEP,
        completion_tag=COMPLETION_TAG, text=text)


def synthesis_prompt(name: str, fragments: list[str]) -> str:
    listed = "\n".join(f"- {f}" for f in fragments)
    return SYNTHESIS_TEMPLATE.format(name=name, fragments=listed)


def recaption_instruction(keywords: list[str]) -> str:
    return RECAPTION_INSTRUCTION_TEMPLATE.format(keywords=", ".join(keywords))


def winrate_judge_prompt(query: str, answer1: str, answer2: str) -> str:
    return WINRATE_JUDGE_TEMPLATE.format(query=query, answer1=answer1, answer2=answer2)


def quantitative_judge_prompt(query: str, baseline_answer: str,
                              evaluation_answer: str) -> str:
    return QUANTITATIVE_JUDGE_TEMPLATE.format(
        query=query, baseline_answer=baseline_answer,
        evaluation_answer=evaluation_answer)
