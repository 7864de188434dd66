"""
Cosine similarity on flattened planes.

Cos(a, b) = <a, b> / (|a| |b|), defined as 0 when either norm is 0. The
zero-norm branch keeps gradients finite (no sqrt of zero is differentiated).
"""

import torch


def cosine(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """
    Cosine similarity over the last two dimensions.

    Leading dimensions broadcast, so ``cosine(recovered[:, None], templates[None])``
    yields a (B, n) matrix.

    Args:
        a: Tensor (..., H, W)
        b: Tensor (..., H, W)

    Returns:
        Tensor of shape broadcast(a.shape[:-2], b.shape[:-2])
    """
    a_flat = a.flatten(-2)
    b_flat = b.flatten(-2)
    dot = (a_flat * b_flat).sum(-1)
    norm_sq = (a_flat * a_flat).sum(-1) * (b_flat * b_flat).sum(-1)
    nonzero = norm_sq > 0
    safe = torch.where(nonzero, norm_sq, torch.ones_like(norm_sq))
    return torch.where(nonzero, dot / torch.sqrt(safe), torch.zeros_like(dot))


def cosine_to_set(recovered: torch.Tensor, templates: torch.Tensor) -> torch.Tensor:
    """
    Cosine of each recovered plane against every template.

    Args:
        recovered: (H, W) or (B, H, W)
        templates: (n, H, W)

    Returns:
        (n,) for a single plane, (B, n) for a batch
    """
    if recovered.dim() == 2:
        return cosine(recovered.unsqueeze(0), templates)
    return cosine(recovered.unsqueeze(1), templates.unsqueeze(0))


def max_cosine(recovered: torch.Tensor, templates: torch.Tensor):
    """
    Max-cosine score and its template index.

    torch.max returns the first maximal index, so ties resolve to the lowest
    template index.

    Returns:
        Tuple of (scores, indices) shaped like recovered without (H, W)
    """
    return cosine_to_set(recovered, templates).max(dim=-1)
