"""Prompt assembly and explanation generation over a retrieved subgraph."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .errors import PipelineError, TemplateError
from .gateway import ChatMessage, ChatRequest, Gateway
from .graph import Ackg
from .index import VectorIndex
from .retriever import (
    ContextSubgraph,
    PaintingQuery,
    RetrieverConfig,
    retrieve_context,
    subgraph_to_dict,
)
from .templates import load_prompt

logger = logging.getLogger(__name__)

DEFAULT_INSTRUCTION = (
    "Describe and explain this painting, covering content and its artistic, "
    "cultural, and historical context."
)
DEFAULT_CHAR_BUDGET = 16000

PLACEHOLDERS = ("{attributes}", "{subgraph}", "{question}")

# description caps tried in order when the assembled prompt overflows
_SHRINK_STEPS = (None, 256, 128, 64, 32)


@dataclass
class FewShotExample:
    attributes: str
    subgraph: str
    explanation: str

    def validate(self) -> None:
        if not (self.attributes.strip() and self.subgraph.strip() and self.explanation.strip()):
            raise TemplateError("few-shot example parts must all be non-empty")


@dataclass
class PromptTemplate:
    system: str
    few_shot: List[FewShotExample]
    context_header: str
    instruction: str

    def validate(self) -> None:
        for placeholder in PLACEHOLDERS:
            count = self.instruction.count(placeholder)
            if count != 1:
                raise TemplateError(
                    f"instruction must contain {placeholder} exactly once, found {count}"
                )
        for example in self.few_shot:
            example.validate()

    @classmethod
    def load(cls, path: Optional[str] = None, prompt_dir: Optional[str] = None) -> "PromptTemplate":
        if path:
            with open(path, "r", encoding="utf-8") as handle:
                raw = json.load(handle)
        else:
            raw = json.loads(load_prompt("generation.json", prompt_dir))
        try:
            template = cls(
                system=raw["system"],
                few_shot=[
                    FewShotExample(ex["attributes"], ex["subgraph"], ex["explanation"])
                    for ex in raw.get("few_shot", [])
                ],
                context_header=raw["context_header"],
                instruction=raw["instruction"],
            )
        except (KeyError, TypeError) as exc:
            raise TemplateError(f"malformed generation template: {exc}") from None
        template.validate()
        return template


def linearize_subgraph(
    subgraph: ContextSubgraph, max_description_chars: Optional[int] = None
) -> str:
    """Readable rendering: scored entity lines, then oriented relation lines."""

    def clip(text: str) -> str:
        if max_description_chars is not None and len(text) > max_description_chars:
            return text[:max_description_chars]
        return text

    if not subgraph.nodes:
        return "Entities: (none)\nRelations: (none)"
    name_of = {node.id: node.name for node in subgraph.nodes}
    lines = ["Entities:"]
    for node in subgraph.nodes:  # already ordered by combined score
        lines.append(f"- {node.name} ({node.node_type.value}): {clip(node.description)}")
    if subgraph.edges:
        lines.append("Relations:")
        for edge in subgraph.edges:  # already ordered by endpoint-id pair
            source = name_of.get(edge.source, edge.source)
            target = name_of.get(edge.target, edge.target)
            lines.append(f"- {source} -> {target}: {clip(edge.description)}")
    else:
        lines.append("Relations: (none)")
    return "\n".join(lines)


def _few_shot_text(template: PromptTemplate) -> str:
    blocks = []
    for i, example in enumerate(template.few_shot, start=1):
        blocks.append(
            f"Example {i}:\nPainting metadata:\n{example.attributes}\n\n"
            f"{example.subgraph}\n\nExplanation: {example.explanation}"
        )
    return "\n\n".join(blocks)


def build_prompt(
    template: PromptTemplate,
    painting: PaintingQuery,
    subgraph: ContextSubgraph,
    question: Optional[str] = None,
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> ChatRequest:
    """Assemble the in-context-learning request; bounded by char_budget.

    When the full prompt overflows, node and edge descriptions are truncated
    in steps; as a last resort the subgraph section itself is cut.
    """
    template.validate()
    painting.validate()
    attributes_text = "\n".join(painting.attribute_lines()) or "(no textual metadata)"
    question_text = (question or painting.question or DEFAULT_INSTRUCTION).strip()
    few_shot = _few_shot_text(template)

    user_text = ""
    for cap in _SHRINK_STEPS:
        subgraph_text = f"{template.context_header}\n{linearize_subgraph(subgraph, cap)}"
        body = (
            template.instruction.replace("{attributes}", attributes_text)
            .replace("{subgraph}", subgraph_text)
            .replace("{question}", question_text)
        )
        user_text = f"{few_shot}\n\n{body}" if few_shot else body
        if len(template.system) + len(user_text) <= char_budget:
            break
    overflow = len(template.system) + len(user_text) - char_budget
    if overflow > 0:
        # last resort: cut the subgraph section, keep metadata and question
        user_text = user_text.replace(
            subgraph_text, subgraph_text[: max(0, len(subgraph_text) - overflow)], 1
        )

    return ChatRequest(
        [ChatMessage("system", template.system), ChatMessage("user", user_text)],
        image_attachments=painting.attachments(),
    )


@dataclass
class GenerationResult:
    explanation: str
    prompt: str
    cited_nodes: List[str]
    cited_edges: List[Tuple[str, str]]
    usage: Optional[Tuple[int, int]] = None
    subgraph: ContextSubgraph = field(default_factory=lambda: ContextSubgraph([], [], []))

    def as_dict(self) -> Dict[str, object]:
        return {
            "explanation": self.explanation,
            "prompt": self.prompt,
            "cited_nodes": list(self.cited_nodes),
            "cited_edges": [list(pair) for pair in self.cited_edges],
            "usage": list(self.usage) if self.usage else None,
            "subgraph": subgraph_to_dict(self.subgraph),
        }


def explain(
    gateway: Gateway,
    graph: Ackg,
    index: VectorIndex,
    painting: PaintingQuery,
    config: Optional[RetrieverConfig] = None,
    template: Optional[PromptTemplate] = None,
    prompt_dir: Optional[str] = None,
    question: Optional[str] = None,
    char_budget: int = DEFAULT_CHAR_BUDGET,
) -> GenerationResult:
    """Retrieve context, build the prompt, and generate the explanation."""
    subgraph = retrieve_context(gateway, graph, index, painting, config, prompt_dir)
    if template is None:
        template = PromptTemplate.load(prompt_dir=prompt_dir)
    request = build_prompt(template, painting, subgraph, question=question, char_budget=char_budget)
    try:
        response = gateway.chat(request)
    except Exception as exc:
        raise PipelineError("generate", str(exc)) from exc
    prompt_text = "\n\n".join(m.text for m in request.messages)
    return GenerationResult(
        explanation=response.text,
        prompt=prompt_text,
        cited_nodes=subgraph.node_ids,
        cited_edges=[(e.source, e.target) for e in subgraph.edges],
        usage=response.usage,
        subgraph=subgraph,
    )
