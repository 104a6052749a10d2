"""Built-in models with their per-model numerical defaults."""

from __future__ import annotations

from dataclasses import dataclass

from .pgf import RationalPGF


@dataclass(frozen=True)
class Preset:
    name: str
    p: tuple
    q: tuple
    kappa_scale: float  # a in a^m kappa_m
    y_shift: float  # line Im z = -y for the Fourier coefficients of K^m
    left_terms: int
    left_harmonics: int

    def model(self) -> RationalPGF:
        return RationalPGF.from_coeffs(self.p, self.q, name=self.name)


PRESETS = {
    # G = (z + z^2) / (3 - z)
    "example1": Preset("example1", (0, 1, 1), (3, -1), 1 / 5.3, 2.9, 30, 50),
    # G = 4(z + z^2) / (9 - z^2)
    "example2": Preset("example2", (0, 4, 4), (9, 0, -1), 1 / 4.1, 4.0, 40, 60),
    # G = 2z / ((3 - z)(2 - z))
    "example3": Preset("example3", (0, 2), (6, -5, 1), 1 / 2, 3.0, 30, 50),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def preset_for(model: RationalPGF):
    """The preset whose coefficients match ``model``, or None."""
    for pr in PRESETS.values():
        if list(map(float, pr.p)) == model.p_coeffs.tolist() and list(map(float, pr.q)) == model.q_coeffs.tolist():
            return pr
    return None
