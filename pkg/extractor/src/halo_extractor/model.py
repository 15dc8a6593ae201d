"""Proxy-model backends: a deterministic builtin tiny transformer, or any
causal LM loadable through transformers.

The builtin model ("tiny-random-gpt2", optionally "tiny-random-gpt2:seed=N")
is a randomly initialized small GPT-2 over a word-level vocabulary built from
the exact prompt/passage tokens. It needs no downloads and is fully
deterministic, which is what the extraction tests and fixtures rely on.
"""

from __future__ import annotations

import torch

from .tagging import ENTITY_TYPES, word_tokens

UNK = "<unk>"
TAG_OPEN = "<"
BUILTIN_PREFIX = "tiny-random-gpt2"


class ExtractionError(RuntimeError):
    pass


class WordVocab:
    """Deterministic word-level vocabulary over the given texts."""

    def __init__(self, texts: list[str]):
        seen = {UNK, TAG_OPEN, ">"}
        seen.update(f"<{t}>" for t in ENTITY_TYPES)
        for text in texts:
            seen.update(tok for tok, _, _ in word_tokens(text))
        self.tokens = sorted(seen)
        self.index = {tok: k for k, tok in enumerate(self.tokens)}

    def __len__(self) -> int:
        return len(self.tokens)

    def encode(self, words: list[str]) -> list[int]:
        unk = self.index[UNK]
        return [self.index.get(w, unk) for w in words]


class BuiltinModel:
    """Seeded random-init GPT-2 with a word-level vocabulary."""

    def __init__(self, vocab: WordVocab, seed: int = 0):
        from transformers import GPT2Config, GPT2LMHeadModel

        config = GPT2Config(
            vocab_size=len(vocab),
            n_positions=1024,
            n_embd=64,
            n_layer=2,
            n_head=2,
            bos_token_id=0,
            eos_token_id=0,
            attn_implementation="eager",  # sdpa does not expose attentions
        )
        torch.manual_seed(seed)
        self.model = GPT2LMHeadModel(config).eval()
        self.vocab = vocab
        self.max_positions = config.n_positions
        self.model_id = f"{BUILTIN_PREFIX}:seed={seed}"

    def tokenize_words(self, words: list[str]) -> list[list[int]]:
        # word-level vocabulary: every word is exactly one model token
        return [[i] for i in self.vocab.encode(words)]

    def decode_token(self, token_id: int) -> str:
        return self.vocab.tokens[token_id]

    def tag_open_ids(self) -> list[int]:
        return [self.vocab.index[TAG_OPEN]]

    @torch.no_grad()
    def forward(self, ids: list[int]) -> tuple[torch.Tensor, torch.Tensor]:
        """(logits [T, V] in float64, pooled attention [T, T])."""
        if len(ids) > self.max_positions:
            raise ExtractionError(f"context overflow: {len(ids)} > {self.max_positions} positions")
        out = self.model(torch.tensor([ids]), output_attentions=True)
        logits = out.logits[0].double()
        pooled = torch.stack(out.attentions).amax(dim=(0, 1, 2))
        return logits, pooled


class HubModel:
    """Any causal LM loadable via transformers AutoModel (best effort).

    Word-to-subtoken alignment is many-to-one: every sub-token of a word
    inherits the word's keyword annotation.
    """

    def __init__(self, model_id: str):
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id, attn_implementation="eager").eval()
        self.max_positions = getattr(self.model.config, "max_position_embeddings", 2048)
        self.model_id = model_id

    def tokenize_words(self, words: list[str]) -> list[list[int]]:
        out = []
        for pos, word in enumerate(words):
            text = (" " + word) if pos > 0 and word[0].isalnum() else word
            out.append(self.tokenizer.encode(text, add_special_tokens=False))
        return out

    def decode_token(self, token_id: int) -> str:
        return self.tokenizer.decode([token_id])

    def tag_open_ids(self) -> list[int]:
        ids = []
        for text in (TAG_OPEN, " " + TAG_OPEN):
            encoded = self.tokenizer.encode(text, add_special_tokens=False)
            if len(encoded) == 1:
                ids.append(encoded[0])
        return ids

    @torch.no_grad()
    def forward(self, ids: list[int]) -> tuple[torch.Tensor, torch.Tensor]:
        if len(ids) > self.max_positions:
            raise ExtractionError(f"context overflow: {len(ids)} > {self.max_positions} positions")
        out = self.model(torch.tensor([ids]), output_attentions=True)
        logits = out.logits[0].double()
        pooled = torch.stack(out.attentions).amax(dim=(0, 1, 2))
        return logits, pooled


def load_model(model_id: str, context_texts: list[str]):
    if model_id == BUILTIN_PREFIX or model_id.startswith(BUILTIN_PREFIX + ":"):
        seed = 0
        if ":" in model_id:
            seed = int(model_id.split(":", 1)[1].removeprefix("seed="))
        return BuiltinModel(WordVocab(context_texts), seed=seed)
    return HubModel(model_id)
