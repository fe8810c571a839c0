"""Prompt templates sent to the language model.

These strings are part of the wire contract shared with evaluation clients;
change them only in lockstep (both sides pin them with golden tests).
"""

MAX_MERGE_CAPTIONS = 32

MERGE_PROMPT_HEADER = (
    "Given a set of descriptions about the same 3D object, distill these "
    "descriptions into one concise caption. The descriptions are as follows:"
)
MERGE_PROMPT_FOOTER = (
    "Avoid describing background, surface, and posture. The caption should be:"
)

JUDGE_PROMPT_TEMPLATE = """You are an assessment expert responsible for prompt-prediction pairs. Your task is to score the prediction according to the following requirements:

1. Evaluate the recall, or how well the prediction covers the information in the prompt. If the prediction contains information that does not appear in the prompt, it should not be considered as bad.

2. If the prediction contains correct information about color or features in the prompt, you should also consider raising your score.

3. Assign a score between 1 and 5, with 5 being the highest. Do not provide a complete answer; give the score in the format: 3

Prompt: {prompt}

Prediction: {prediction}"""


def build_merge_prompt(captions: list[str]) -> str:
    if not 1 <= len(captions) <= MAX_MERGE_CAPTIONS:
        raise ValueError(f"caption count must be in [1, {MAX_MERGE_CAPTIONS}]")
    if any(not c.strip() for c in captions):
        raise ValueError("captions must be non-empty")
    lines = "\n".join(f"view{i}: {c}" for i, c in enumerate(captions, start=1))
    return f"{MERGE_PROMPT_HEADER}\n\n{lines}\n\n{MERGE_PROMPT_FOOTER}"


def build_judge_prompt(prompt: str, prediction: str) -> str:
    if not prompt.strip() or not prediction.strip():
        raise ValueError("prompt and prediction must be non-empty")
    return JUDGE_PROMPT_TEMPLATE.format(prompt=prompt, prediction=prediction)
