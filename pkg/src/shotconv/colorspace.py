"""sRGB <-> CIE LUV conversion (D65) and the brightness-flash augmentation.

Flashes brighten selected frames by scaling LUV lightness, which mimics a
camera flash: a large frame-to-frame intensity jump inside a single shot.
Conversions run in float64 internally; u* and v* are left untouched when
L changes, so flashed colors wash out toward white the way real
overexposure does.
"""

from __future__ import annotations

import numpy as np

from .volume import check_volume

# sRGB primaries under D65, linear RGB -> XYZ (rows X, Y, Z).
_RGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_XYZ_TO_RGB = np.linalg.inv(_RGB_TO_XYZ)

# The white point is what the matrix maps RGB (1, 1, 1) to, so white is an
# exact L = 100 and grays carry exactly zero chroma. Differs from the
# published (0.95047, 1.0, 1.08883) by < 1e-6.
D65_WHITE = _RGB_TO_XYZ.sum(axis=1)

_CIE_EPSILON = 216.0 / 24389.0
_CIE_KAPPA = 24389.0 / 27.0

_WHITE_DENOM = D65_WHITE[0] + 15.0 * D65_WHITE[1] + 3.0 * D65_WHITE[2]
_U_PRIME_WHITE = 4.0 * D65_WHITE[0] / _WHITE_DENOM
_V_PRIME_WHITE = 9.0 * D65_WHITE[1] / _WHITE_DENOM


def srgb_to_linear(c):
    """Undo the sRGB transfer curve."""
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(c):
    """Apply the sRGB transfer curve."""
    c = np.asarray(c, dtype=np.float64)
    c = np.maximum(c, 0.0)
    return np.where(c <= 0.0031308, 12.92 * c, 1.055 * c ** (1.0 / 2.4) - 0.055)


def srgb_to_xyz(rgb):
    return srgb_to_linear(rgb) @ _RGB_TO_XYZ.T


def xyz_to_srgb(xyz):
    return linear_to_srgb(np.asarray(xyz, dtype=np.float64) @ _XYZ_TO_RGB.T)


def xyz_to_luv(xyz):
    """CIE 1976 L*u*v* with L in [0, 100]; black maps to (0, 0, 0)."""
    xyz = np.asarray(xyz, dtype=np.float64)
    x, y, z = xyz[..., 0], xyz[..., 1], xyz[..., 2]
    yr = y / D65_WHITE[1]
    lightness = np.where(
        yr > _CIE_EPSILON, 116.0 * np.cbrt(yr) - 16.0, _CIE_KAPPA * yr
    )
    denom = x + 15.0 * y + 3.0 * z
    safe = denom > 0
    u_prime = np.where(safe, 4.0 * x / np.where(safe, denom, 1.0), _U_PRIME_WHITE)
    v_prime = np.where(safe, 9.0 * y / np.where(safe, denom, 1.0), _V_PRIME_WHITE)
    u = 13.0 * lightness * (u_prime - _U_PRIME_WHITE)
    v = 13.0 * lightness * (v_prime - _V_PRIME_WHITE)
    return np.stack([lightness, u, v], axis=-1)


def luv_to_xyz(luv):
    luv = np.asarray(luv, dtype=np.float64)
    lightness, u, v = luv[..., 0], luv[..., 1], luv[..., 2]
    y = np.where(
        lightness > _CIE_KAPPA * _CIE_EPSILON,
        D65_WHITE[1] * ((lightness + 16.0) / 116.0) ** 3,
        D65_WHITE[1] * lightness / _CIE_KAPPA,
    )
    nonzero = lightness > 0
    scale = 13.0 * np.where(nonzero, lightness, 1.0)
    u_prime = np.where(nonzero, u / scale, 0.0) + _U_PRIME_WHITE
    v_prime = np.where(nonzero, v / scale, 0.0) + _V_PRIME_WHITE
    v_safe = np.where(v_prime != 0, v_prime, 1.0)
    x = y * 9.0 * u_prime / (4.0 * v_safe)
    z = y * (12.0 - 3.0 * u_prime - 20.0 * v_prime) / (4.0 * v_safe)
    zero = ~nonzero
    x = np.where(zero, 0.0, x)
    z = np.where(zero, 0.0, z)
    return np.stack([x, y, z], axis=-1)


def srgb_to_luv(rgb):
    return xyz_to_luv(srgb_to_xyz(rgb))


def luv_to_srgb(luv):
    return xyz_to_srgb(luv_to_xyz(luv))


def apply_flash(frames, frame_indices, gain=1.7):
    """Brighten selected frames of a pixel volume by scaling LUV lightness.

    Per pixel, L becomes min(gain * L, 100). Pixels that would not get
    strictly brighter (pure black, already-saturated white) are copied
    verbatim, so both extremes are exact fixed points. Labels are a
    caller concern: a flash never changes shot membership.
    """
    frames = check_volume(frames, pixel=True, name="frames")
    out = frames.copy()
    t = frames.shape[0]
    for idx in frame_indices:
        if not 0 <= idx < t:
            raise IndexError(f"flash frame index {idx} outside [0, {t})")
        frame = frames[idx]
        luv = srgb_to_luv(frame)
        lightness = luv[..., 0]
        brightened = np.minimum(gain * lightness, 100.0)
        changes = brightened > lightness
        if not changes.any():
            continue
        luv[..., 0] = brightened
        converted = np.clip(luv_to_srgb(luv), 0.0, 1.0).astype(frames.dtype)
        out[idx] = np.where(changes[..., np.newaxis], converted, frame)
    return out
