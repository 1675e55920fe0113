"""
Module Rng - Flux aléatoires reproductibles

Chaque décision aléatoire du banc est tirée d'un ``RngStream`` dérivé d'une
graine maîtresse et d'un index. La graine du flux est SplitMix64(graine XOR index);
elle initialise un générateur Philox (compteur, sans entropie du système).
Les tirages normaux passent par Box-Muller.
"""

import numpy as np

MASQUE_64 = (1 << 64) - 1


def splitmix64(x):
    """
    Applique une étape du mélangeur SplitMix64 à un entier 64 bits.

    Args:
        x (int): Entier (tronqué à 64 bits)

    Returns:
        int: Entier mélangé sur 64 bits
    """
    z = (x + 0x9E3779B97F4A7C15) & MASQUE_64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASQUE_64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASQUE_64
    return z ^ (z >> 31)


def derive_seed(master_seed, index):
    """Graine du flux ``index``: SplitMix64(master_seed XOR index)."""
    return splitmix64((int(master_seed) ^ int(index)) & MASQUE_64)


class RngStream:
    """
    Flux de nombres aléatoires déterministe.

    Deux flux de même (master_seed, stream_index) émettent des suites identiques;
    des index différents ne partagent jamais d'état.

    Attributes:
        master_seed (int): Graine maîtresse
        stream_index (int): Index du flux
        graine (int): Graine dérivée qui initialise le générateur

    Example:
        >>> flux = derive_stream(0, 3)
        >>> z = flux.normale((4, 2))
    """

    def __init__(self, master_seed, stream_index):
        self.master_seed = int(master_seed) & MASQUE_64
        self.stream_index = int(stream_index) & MASQUE_64
        self.graine = derive_seed(self.master_seed, self.stream_index)
        self._generateur = np.random.Generator(np.random.Philox(key=self.graine))

    def __repr__(self):
        return f"RngStream(master_seed={self.master_seed}, stream_index={self.stream_index})"

    def derive(self, index):
        """Crée un sous-flux indépendant, enraciné sur la graine de ce flux."""
        return RngStream(self.graine, index)

    def uniforme(self, taille=None, bas=0.0, haut=1.0):
        """Tirages uniformes dans [bas, haut)."""
        u = self._generateur.random(taille)
        return bas + (haut - bas) * u

    def normale(self, taille):
        """
        Tirages N(0, 1) par la transformation de Box-Muller.

        Args:
            taille (int | tuple): Forme du tableau à produire

        Returns:
            np.ndarray: Tableau float64 de la forme demandée
        """
        forme = (taille,) if np.isscalar(taille) else tuple(taille)
        n = int(np.prod(forme, dtype=np.int64))
        m = (n + 1) // 2
        u1 = 1.0 - self._generateur.random(m)
        u2 = self._generateur.random(m)
        rayon = np.sqrt(-2.0 * np.log(u1))
        angle = 2.0 * np.pi * u2
        z = np.concatenate([rayon * np.cos(angle), rayon * np.sin(angle)])[:n]
        return z.reshape(forme)

    def entiers(self, bas, haut, taille=None):
        """Entiers uniformes dans [bas, haut)."""
        return self._generateur.integers(bas, haut, size=taille)

    def permutation(self, n):
        """Permutation aléatoire de range(n)."""
        return self._generateur.permutation(n)


def derive_stream(master_seed, index):
    """
    Dérive le flux ``index`` de la graine maîtresse.

    Args:
        master_seed (int): Graine maîtresse (u64)
        index (int): Index du flux (u64)

    Returns:
        RngStream: Flux déterministe

    Example:
        >>> derive_stream(7, 0).uniforme(3)  # toujours les mêmes trois valeurs
    """
    return RngStream(master_seed, index)
