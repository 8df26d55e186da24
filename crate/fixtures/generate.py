#!/usr/bin/env python3
"""Regenerate the bundled test fixtures.

Source photographs come from the scikit-image sample data (public domain / CC0):
astronaut (NASA), chelsea and coffee (CC0), rocket (public domain), and
hubble_deep_field (NASA). Night and shadow variants are synthesised in linear
light so the fixtures stay small and fully reproducible.

    python3 fixtures/generate.py
"""

import os

import numpy as np
from PIL import Image
from skimage import data, transform

ROOT = os.path.dirname(os.path.abspath(__file__))
RNG = np.random.default_rng(20240917)


def srgb_to_linear(v):
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(v):
    v = np.clip(v, 0.0, 1.0)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * v ** (1 / 2.4) - 0.055)


def to_float(img):
    return img.astype(np.float64) / 255.0


def to_u8(img):
    return np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)


def save(rel, img, **kw):
    path = os.path.join(ROOT, rel)
    os.makedirs(os.path.dirname(path), exist_ok=True)
    Image.fromarray(to_u8(img)).save(path, **kw)


def resize(img, h, w):
    return transform.resize(img, (h, w), anti_aliasing=True, order=3)


def center_crop(img, h, w):
    y = (img.shape[0] - h) // 2
    x = (img.shape[1] - w) // 2
    return img[y:y + h, x:x + w]


def night(img, exposure, lamps=(), noise=1.5 / 255):
    """Underexpose in linear light, add point light sources and sensor noise."""
    lin = srgb_to_linear(img) * exposure
    h, w = lin.shape[:2]
    yy, xx = np.mgrid[0:h, 0:w]
    for (cy, cx, radius, color) in lamps:
        d2 = ((yy - cy * h) ** 2 + (xx - cx * w) ** 2) / (radius * min(h, w)) ** 2
        glow = np.exp(-d2)[..., None] * np.asarray(color)[None, None, :]
        lin = lin + glow
    out = linear_to_srgb(lin)
    return out + RNG.normal(0.0, noise, out.shape)


def cast_shadow(img, polygon_fn, attenuation=(0.22, 0.25, 0.33), softness=6.0):
    """Darken a region in linear light with a bluish skylight tint and a soft edge."""
    h, w = img.shape[:2]
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    signed = polygon_fn(yy / h, xx / w) * min(h, w)
    weight = 1.0 / (1.0 + np.exp(-signed / softness))
    lin = srgb_to_linear(img)
    att = np.asarray(attenuation)[None, None, :]
    factor = 1.0 - weight[..., None] * (1.0 - att)
    return linear_to_srgb(lin * factor)


def main():
    astronaut = to_float(data.astronaut())
    chelsea = to_float(data.chelsea())
    coffee = to_float(data.coffee())
    rocket = to_float(data.rocket())
    hubble = to_float(data.hubble_deep_field())

    # Pristine natural photographs (NIQE model corpus, PIQE reference).
    save("natural/astronaut.jpg", astronaut, quality=95)
    save("natural/chelsea.jpg", chelsea, quality=95)
    save("natural/coffee.jpg", coffee, quality=95)

    # Dark / night fixtures.
    warm = (0.9, 0.6, 0.25)
    save("night/night_astronaut.png", night(resize(astronaut, 320, 320), 0.05,
                                             [(0.15, 0.8, 0.05, warm)]))
    save("night/night_coffee.png", night(resize(coffee, 240, 360), 0.04,
                                          [(0.1, 0.2, 0.06, warm)]))
    save("night/night_chelsea.png", night(resize(chelsea, 240, 360), 0.06, []))
    save("night/rocket_dusk.png", resize(rocket, 240, 360))
    save("night/deep_field.png", center_crop(hubble, 320, 320))

    # Shadowed daytime fixtures: diagonal, band and corner cast shadows.
    save("shadow/shadow_astronaut.png", cast_shadow(
        resize(astronaut, 320, 320), lambda y, x: 0.55 - x - 0.4 * y))
    save("shadow/shadow_coffee.png", cast_shadow(
        resize(coffee, 240, 360), lambda y, x: 0.18 - np.abs(x - 0.5)))
    save("shadow/shadow_chelsea.png", cast_shadow(
        resize(chelsea, 240, 360), lambda y, x: y - 0.55))

    # 640x480 sunny road-like frame for latency benchmarks.
    bench = center_crop(resize(coffee, 480, 720), 480, 640)
    save("bench/frame_640x480.png", cast_shadow(bench, lambda y, x: x - 0.6 + 0.3 * y))

    # Gray white-noise image.
    noise = np.clip(RNG.normal(0.5, 40.0 / 255.0, (256, 256)), 0.0, 1.0)
    save("noise/white_noise.png", np.repeat(noise[..., None], 3, axis=2))

    # Small tree for batch runs.
    save("batch/day/astronaut.png", cast_shadow(
        resize(astronaut, 128, 128), lambda y, x: 0.5 - x))
    save("batch/day/coffee.png", cast_shadow(
        resize(coffee, 112, 168), lambda y, x: y - 0.6))
    save("batch/day/chelsea.png", resize(chelsea, 112, 168))
    save("batch/night/astronaut.png", night(resize(astronaut, 128, 128), 0.05))
    save("batch/night/coffee.png", night(resize(coffee, 112, 168), 0.04))
    save("batch/night/rocket.png", resize(rocket, 112, 168))


if __name__ == "__main__":
    main()
