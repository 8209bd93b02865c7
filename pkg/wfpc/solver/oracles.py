"""Спектральные точные решения для сверки сеточных решателей."""
import numpy as np

from .grid import MeasurePath, ValueField, heat_semigroup


def cole_hopf(terminal, time, space):
    """u = -2·log(P_{T-t} e^{-g̃/2}) решает -∂_t u + ½|Du|² - Δu = 0."""
    terminal = space.check(terminal, 'terminal')
    weight = np.exp(-terminal / 2.0)
    values = np.array([
        -2.0 * np.log(heat_semigroup(weight, space, time.horizon - t))
        for t in time.nodes
    ])
    return ValueField(time, space, values)


def drifted_heat(initial, time, speed):
    """Решение ∂_t m + c·∂_x m - Δm = 0.

    Сдвиг на c·t и тепловое сглаживание.
    """
    space = initial.grid
    k = space.wavenumbers
    spectrum = np.fft.rfft(initial.density)
    rows = []
    for t in time.nodes:
        multiplier = np.exp(-1j * k * speed * t - k ** 2 * t)
        rows.append(np.fft.irfft(spectrum * multiplier, n=space.n_x))
    densities = np.maximum(np.array(rows), 0.0)
    # срезаем отрицательный звон и возвращаем массу 1
    densities /= space.dx * densities.sum(axis=1, keepdims=True)
    return MeasurePath(time, space, densities)


def heat_mode_amplitude(mode, length, t):
    """Затухание амплитуды k-й гармоники под e^{tΔ}."""
    return float(np.exp(-(2 * np.pi * mode / length) ** 2 * t))
