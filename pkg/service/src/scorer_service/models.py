"""Real model wrappers: CLIP and ImageReward scorers, BLIP captioner.

Heavy imports happen inside ``load`` so the service starts (and degrades
cleanly) on machines without torch or without downloaded weights. Scoring is
deterministic: eval mode, no gradients, no sampling, fixed seeds.
"""

from __future__ import annotations

import numpy as np
from PIL import Image


def _to_pil(image: np.ndarray) -> Image.Image:
    return Image.fromarray(np.asarray(image, dtype=np.uint8))


class ClipScorer:
    """Cosine similarity between CLIP text and image embeddings, in [-1, 1]."""

    def __init__(self, checkpoint: str, device: str = "cpu", deterministic: bool = True):
        import torch
        from transformers import CLIPModel, CLIPProcessor

        if deterministic:
            torch.manual_seed(0)
        self._torch = torch
        self.device = device
        self.model = CLIPModel.from_pretrained(checkpoint).to(device).eval()
        self.processor = CLIPProcessor.from_pretrained(checkpoint)
        self.version = checkpoint

    def score(self, prompt: str, image: np.ndarray) -> float:
        torch = self._torch
        inputs = self.processor(
            text=[prompt], images=[_to_pil(image)], return_tensors="pt",
            padding=True, truncation=True,
        ).to(self.device)
        with torch.no_grad():
            output = self.model(**inputs)
        text = output.text_embeds / output.text_embeds.norm(dim=-1, keepdim=True)
        img = output.image_embeds / output.image_embeds.norm(dim=-1, keepdim=True)
        return float((text * img).sum(dim=-1).item())


class ImageRewardScorer:
    """Human-preference reward model; scores roughly span [-2.5, 2.5]."""

    def __init__(self, checkpoint: str, device: str = "cpu", deterministic: bool = True):
        import torch

        import ImageReward

        if deterministic:
            torch.manual_seed(0)
        self._torch = torch
        self.model = ImageReward.load(checkpoint, device=device)
        self.version = checkpoint

    def score(self, prompt: str, image: np.ndarray) -> float:
        with self._torch.no_grad():
            return float(self.model.score(prompt, _to_pil(image)))


class BlipCaptioner:
    """Greedy BLIP captioning (no sampling, so captions are deterministic)."""

    def __init__(self, checkpoint: str, device: str = "cpu", deterministic: bool = True):
        import torch
        from transformers import BlipForConditionalGeneration, BlipProcessor

        if deterministic:
            torch.manual_seed(0)
        self._torch = torch
        self.device = device
        self.model = BlipForConditionalGeneration.from_pretrained(checkpoint).to(device).eval()
        self.processor = BlipProcessor.from_pretrained(checkpoint)
        self.version = checkpoint

    def caption(self, image: np.ndarray) -> str:
        torch = self._torch
        inputs = self.processor(images=_to_pil(image), return_tensors="pt").to(self.device)
        with torch.no_grad():
            ids = self.model.generate(**inputs, max_new_tokens=40, do_sample=False, num_beams=1)
        return self.processor.decode(ids[0], skip_special_tokens=True).strip()


def make_loader(name: str, checkpoint: str, device: str, deterministic: bool):
    if name == "clip":
        return lambda: ClipScorer(checkpoint, device, deterministic)
    if name == "imagereward":
        return lambda: ImageRewardScorer(checkpoint, device, deterministic)
    if name == "blip":
        return lambda: BlipCaptioner(checkpoint, device, deterministic)
    raise ValueError(f"no loader for model {name!r}")
