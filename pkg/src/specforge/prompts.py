"""Prompt construction for every agent.

All prompts start with a bracketed tag header, e.g.
``[task: draft] [level: SCRIPT] [subfunction: add_round_key]``. The headers
give the scripted provider stable substrings to match on and make transcript
fixtures robust against incidental wording changes elsewhere in the prompt.
"""

from __future__ import annotations

from .document import PromptContext
from .providers import ChatMessage, CompletionRequest, Part, Role

DEFAULT_TEMPERATURE = 0.0
DEFAULT_MAX_OUTPUT_CHARS = 200_000

BASE_PROMPTS = {
    "Summarizer": "You condense one section of an engineering specification into a concise, "
                  "faithful summary. Keep every number, symbol, and table value that matters.",
    "Decomposer": "You organize a target implementation into an ordered sequence of "
                  "implementable sub-functions. Respond with a ```plan fence containing JSON: "
                  '{"target": str, "sub_functions": [{"name": str, "goal": str, '
                  '"depends_on": [str]}]}. Dependencies may only name earlier entries.',
    "Describer": "You collate everything needed to implement one sub-function into a "
                 "structured dictionary. Respond with an ```infodict fence containing JSON: "
                 '{"name": str, "inputs": [{"name": str, "type": str, "width": str}], '
                 '"outputs": [...], "functionality": str, '
                 '"references": [{"section_id": str, "quote": str}], "depends_on": [str], '
                 '"side_effect_only": bool}. Quotes must be copied verbatim from the document.',
    "Verifier": "You review artifacts for correctness. Respond with a ```verdict fence "
                'containing JSON: {"verdict": "ACCEPT"|"REVISE"|"REGENERATE", '
                '"comments": [str], "suspicion": "CURRENT"|"PRIOR_SUBFUNCTION"|'
                '"INSTRUCTIONS"|"UNKNOWN"}. For test derivation respond with a ```tests '
                'fence containing JSON: [{"id": str, "inputs": [str], "expected": str}].',
    "Coder": "You implement exactly one sub-function at the requested abstraction level. "
             "Output only that sub-function wrapped in the marker protocol: a line of "
             "exactly 20 asterisks, then 'SUBFUNCTION: <name>', the code, and a closing "
             "line of exactly 20 asterisks.",
    "PromptOptimizer": "You study a log of failed coding attempts, extract the recurring "
                       "mistake, and write a short prompt addendum that prevents it. Respond "
                       'with an ```addendum fence containing JSON: {"trigger_summary": str, '
                       '"addendum": str}.',
    "Analyzer": "You review a generation trajectory, summarize completed work, and propose "
                "where the error may reside. Respond with an ```analysis fence containing "
                'JSON: {"completed_work": str, "failure_focus": str, "hypotheses": '
                '[{"locus": "CURRENT"|"PRIOR_SUBFUNCTION"|"INSTRUCTIONS"|"UNKNOWN", '
                '"name": str|null, "rationale": str}]}.',
    "Reflector": "You pick the resolution strategy after a coding budget ran out. Respond "
                 'with a ```route fence containing JSON: {"route": "REVISE_INSTRUCTIONS"|'
                 '"REVISE_PRIOR"|"REGENERATE_CURRENT"|"ESCALATE_HUMAN", "target": str|null, '
                 '"feedback": str, "justification": str}. For escalation requests respond '
                 'with an ```intervention fence containing JSON: {"observations": str, '
                 '"attempts": str, "questions": [str]}.',
    "CodeOptimizer": "You rewrite one sub-function so it satisfies the synthesis coding "
                     "rules without changing its behavior. Output the rewritten sub-function "
                     "in the marker protocol (20-asterisk fence with a SUBFUNCTION label).",
    "NoiseInjector": "You revise one artifact exactly as instructed.",
}

# Verbatim perturbation instruction used by the robustness-ablation mode.
NOISE_INSTRUCTION = (
    "Revise the generated implementation while introducing a subtle but impactful "
    "mistake. The mistake should not be a syntax error but rather a semantic flaw "
    "that could lead to functional misbehavior. Ensure that the revised "
    "implementation remains coherent and well-structured."
)

MARKER_PROTOCOL_REMINDER = (
    "Protocol reminder: output exactly one block formatted as a line of exactly 20 "
    "asterisks, then 'SUBFUNCTION: <name>', then the code, then a closing line of "
    "exactly 20 asterisks."
)


def tag_header(**tags: str) -> str:
    return " ".join(f"[{k}: {v}]" for k, v in tags.items())


def build_request(agent: str, header: str, body_sections: list[str],
                  context: PromptContext | None = None, tag: str = "",
                  temperature: float = DEFAULT_TEMPERATURE,
                  max_output_chars: int = DEFAULT_MAX_OUTPUT_CHARS) -> CompletionRequest:
    """Assemble the standard two-message request for one agent call."""
    parts: list[Part] = [Part.text(header)]
    for section in body_sections:
        if section:
            parts.append(Part.text(section))
    if context is not None:
        parts.append(Part.text(context.text))
        for att in context.attachments:
            parts.append(Part.image_ref(att.path))
    messages = (
        ChatMessage(role=Role.SYSTEM, parts=(Part.text(BASE_PROMPTS[agent]),)),
        ChatMessage(role=Role.USER, parts=tuple(parts)),
    )
    return CompletionRequest(agent_name=agent, messages=messages, temperature=temperature,
                             max_output_chars=max_output_chars, tag=tag or agent.lower())
