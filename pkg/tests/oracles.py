"""Independent reference implementations used as test oracles.

Everything here is written straight from the defining formulas and kept
deliberately naive (explicit loops, scalar math). The oracles must not
share code with the optimized paths they check.
"""

import math

import numpy as np


def conv3d_reference(x, weights, bias=None, spatial_stride=1):
    """Direct-summation valid 3D cross-correlation.

    x: (t, h, w, c); weights: (kt, kh, kw, c, co); bias: (co,) or None.
    Accumulates in float64 regardless of input dtype.
    """
    t, h, w, c = x.shape
    kt, kh, kw, ci, co = weights.shape
    assert ci == c
    s = spatial_stride
    to = t - kt + 1
    ho = (h - kh) // s + 1
    wo = (w - kw) // s + 1
    out = np.zeros((to, ho, wo, co), dtype=np.float64)
    for ot in range(to):
        for oy in range(ho):
            for ox in range(wo):
                for oc in range(co):
                    acc = 0.0
                    for dt in range(kt):
                        for dy in range(kh):
                            for dx in range(kw):
                                for ic in range(ci):
                                    acc += float(
                                        x[ot + dt, oy * s + dy, ox * s + dx, ic]
                                    ) * float(weights[dt, dy, dx, ic, oc])
                    if bias is not None:
                        acc += float(bias[oc])
                    out[ot, oy, ox, oc] = acc
    return out


def central_difference(f, x, flat_index, step=1e-5):
    """Central finite difference of scalar f w.r.t. one element of x."""
    xp = np.array(x, dtype=np.float64)
    xm = np.array(x, dtype=np.float64)
    xp.flat[flat_index] += step
    xm.flat[flat_index] -= step
    return (f(xp) - f(xm)) / (2.0 * step)


def relative_error(a, b, floor=1e-4):
    """|a - b| over max(|a|, |b|, floor)."""
    return abs(a - b) / max(abs(a), abs(b), floor)


def softmax_xent_reference(logits, label):
    """Scalar-math cross-entropy for one two-class logit pair.

    Returns (loss, grad) computed with math.exp after max subtraction.
    """
    l0, l1 = float(logits[0]), float(logits[1])
    m = max(l0, l1)
    e0 = math.exp(l0 - m)
    e1 = math.exp(l1 - m)
    z = e0 + e1
    p0, p1 = e0 / z, e1 / z
    loss = -math.log((p0, p1)[label])
    grad = [p0, p1]
    grad[label] -= 1.0
    return loss, (grad[0], grad[1])


def pair_labels_reference(n_frames, blended, shot_ids):
    """First-principles per-frame pair labels.

    ``blended[i]`` says frame i is a transition blend; ``shot_ids[i]``
    identifies which shot a non-blended frame came from. Label i is 0
    when the pair (i-1, i) touches a blended frame or straddles a shot
    change; index 0 is 1 by convention.
    """
    labels = np.ones(n_frames, dtype=np.uint8)
    for i in range(1, n_frames):
        if blended[i] or blended[i - 1]:
            labels[i] = 0
        elif shot_ids[i] != shot_ids[i - 1]:
            labels[i] = 0
    return labels


def bilinear_reference(image, out_h, out_w):
    """Scalar-loop half-pixel bilinear resize of one (h, w, c) frame."""
    h, w, c = image.shape
    out = np.zeros((out_h, out_w, c), dtype=np.float64)
    for oy in range(out_h):
        sy = (oy + 0.5) * h / out_h - 0.5
        sy = min(max(sy, 0.0), h - 1.0)
        y0 = int(math.floor(sy))
        y1 = min(y0 + 1, h - 1)
        fy = sy - y0
        for ox in range(out_w):
            sx = (ox + 0.5) * w / out_w - 0.5
            sx = min(max(sx, 0.0), w - 1.0)
            x0 = int(math.floor(sx))
            x1 = min(x0 + 1, w - 1)
            fx = sx - x0
            for ch in range(c):
                top = (1 - fx) * float(image[y0, x0, ch]) + fx * float(
                    image[y0, x1, ch]
                )
                bot = (1 - fx) * float(image[y1, x0, ch]) + fx * float(
                    image[y1, x1, ch]
                )
                out[oy, ox, ch] = (1 - fy) * top + fy * bot
    return out


def sliding_window_probs(params, frames):
    """Per-window probabilities: run every 10-frame window independently.

    This is the independent check of the fully-convolutional claim; it
    reuses only the public single-window forward pass.
    """
    from shotconv.model import WINDOW, forward

    frames = np.asarray(frames)
    t = frames.shape[0]
    rows = []
    for start in range(t - WINDOW + 1):
        series = forward(params, frames[start : start + WINDOW])
        rows.append(series.probs[0])
    return np.stack(rows)
