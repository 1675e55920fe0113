"""
Module Denoiser - Réseaux prédicteurs de bruit ε_θ(x_t, t)

Ce module fournit le plongement temporel sinusoïdal, un petit U-Net pour les
images (une projection linéaire du plongement est ajoutée dans chaque bloc,
les sorties de l'encodeur sont concaténées dans le décodeur) et un MLP pour
la tâche jouet en 2D.
"""

from dataclasses import dataclass

import numpy as np

from core import autodiff as ad
from core.autodiff import Tensor
from core.layers import Conv2d, Linear, Module
from exceptions import DimensionPlongementError, FormeInvalideError, PasHorsBornesError


@dataclass(frozen=True)
class TimeEmbedding:
    """Plongement sinusoïdal de dimension paire ``dim`` et de base ``base``."""

    dim: int = 64
    base: float = 10000.0

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise DimensionPlongementError(f"dimension de plongement impaire ou nulle: {self.dim}")


def time_embed(t, cfg):
    """
    Plongement de pas de temps: emb[2i] = sin(t·ω_i), emb[2i+1] = cos(t·ω_i), ω_i = base^(−2i/dim).

    Args:
        t (int | np.ndarray): Pas de temps (scalaire ou vecteur de N pas)
        cfg (TimeEmbedding | int): Configuration, ou directement la dimension

    Returns:
        np.ndarray: Vecteur (dim,) ou matrice (N, dim)

    Example:
        >>> time_embed(1, TimeEmbedding(dim=2))
        array([0.84147098, 0.54030231])
    """
    if not isinstance(cfg, TimeEmbedding):
        cfg = TimeEmbedding(dim=int(cfg))
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise PasHorsBornesError("pas de temps négatif")
    omega = cfg.base ** (-2.0 * np.arange(cfg.dim // 2) / cfg.dim)
    angles = t[..., None] * omega
    emb = np.empty(t.shape + (cfg.dim,))
    emb[..., 0::2] = np.sin(angles)
    emb[..., 1::2] = np.cos(angles)
    return emb


@dataclass(frozen=True)
class UNetConfig:
    """
    Taille du U-Net.

    Attributes:
        input_size (int): Côté de l'image (puissance de deux)
        base_channels (int): Canaux au premier niveau, doublés à chaque niveau
        depth (int): Nombre de niveaux de sous-échantillonnage
        time_dim (int): Dimension du plongement temporel
        channels (int): Canaux de l'image
    """

    input_size: int = 32
    base_channels: int = 32
    depth: int = 2
    time_dim: int = 64
    channels: int = 1

    def __post_init__(self):
        if min(self.input_size, self.base_channels, self.depth, self.time_dim, self.channels) <= 0:
            raise FormeInvalideError("UNetConfig: toutes les tailles doivent être positives")
        if self.input_size % (2 ** self.depth):
            raise FormeInvalideError(
                f"UNetConfig: {self.input_size} non divisible par 2^{self.depth}"
            )
        TimeEmbedding(self.time_dim)

    def canaux(self, niveau):
        return self.base_channels * 2 ** niveau


class BlocTemporel(Module):
    """conv-SiLU, + projection du plongement temporel, conv-SiLU."""

    def __init__(self, entree, sortie, time_dim, rng=None):
        super().__init__()
        self.conv1 = Conv2d(entree, sortie, 3, rng=rng)
        self.projection = Linear(time_dim, sortie, rng=rng)
        self.conv2 = Conv2d(sortie, sortie, 3, rng=rng)

    def forward(self, h, plongement):
        h = ad.silu(self.conv1(h))
        p = self.projection(plongement)
        h = ad.add(h, ad.reshape(p, p.shape + (1, 1)))
        return ad.silu(self.conv2(h))


def _parametres_bloc(entree, sortie, time_dim):
    return 9 * entree * sortie + sortie + time_dim * sortie + sortie + 9 * sortie * sortie + sortie


class UNet(Module):
    """
    Petit U-Net prédicteur de bruit.

    Encodeur: niveaux de ``base·2^l`` canaux suivis d'un pooling moyen;
    milieu à ``base·2^depth`` canaux; décodeur symétrique avec suréchantillonnage
    au plus proche voisin et concaténation des sorties de l'encodeur.

    Example:
        >>> unet = UNet(UNetConfig(), rng=derive_stream(0, 0))
        >>> unet(Tensor(np.zeros((2, 1, 32, 32))), np.array([1, 5])).shape
        (2, 1, 32, 32)
    """

    def __init__(self, cfg=None, rng=None):
        super().__init__()
        self.cfg = cfg or UNetConfig()
        c = self.cfg
        self.entree = Conv2d(c.channels, c.base_channels, 3, rng=rng)
        self.encodeurs = []
        precedent = c.base_channels
        for niveau in range(c.depth):
            self.encodeurs.append(BlocTemporel(precedent, c.canaux(niveau), c.time_dim, rng))
            precedent = c.canaux(niveau)
        self.milieu = BlocTemporel(precedent, c.canaux(c.depth), c.time_dim, rng)
        self.decodeurs = []
        montant = c.canaux(c.depth)
        for niveau in reversed(range(c.depth)):
            self.decodeurs.append(
                BlocTemporel(montant + c.canaux(niveau), c.canaux(niveau), c.time_dim, rng)
            )
            montant = c.canaux(niveau)
        self.sortie = Conv2d(c.base_channels, c.channels, 3, rng=rng)

    def forward(self, x, t):
        c = self.cfg
        attendu = (c.channels, c.input_size, c.input_size)
        if x.ndim != 4 or x.shape[1:] != attendu:
            raise FormeInvalideError(f"U-Net: entrée {x.shape}, attendu (N, {attendu})")
        t = np.broadcast_to(np.asarray(t), (x.shape[0],))
        plongement = Tensor(time_embed(t, c.time_dim))
        h = self.entree(x)
        sauts = []
        for bloc in self.encodeurs:
            h = bloc(h, plongement)
            sauts.append(h)
            h = ad.avg_pool2(h)
        h = self.milieu(h, plongement)
        for bloc, saut in zip(self.decodeurs, reversed(sauts)):
            h = ad.concat_channels(ad.upsample_nearest2x(h), saut)
            h = bloc(h, plongement)
        return self.sortie(h)


def unet_parameter_count(cfg):
    """
    Nombre de paramètres du U-Net, en forme close.

    Pour la configuration par défaut (32, 32, 2, 64, 1): 501 281.
    """
    b, d, td, ch = cfg.base_channels, cfg.depth, cfg.time_dim, cfg.channels
    total = 9 * ch * b + b
    precedent = b
    for niveau in range(d):
        total += _parametres_bloc(precedent, cfg.canaux(niveau), td)
        precedent = cfg.canaux(niveau)
    total += _parametres_bloc(precedent, cfg.canaux(d), td)
    montant = cfg.canaux(d)
    for niveau in reversed(range(d)):
        total += _parametres_bloc(montant + cfg.canaux(niveau), cfg.canaux(niveau), td)
        montant = cfg.canaux(niveau)
    return total + 9 * b * ch + ch


def denoiser_forward(x, t, params, cfg):
    """
    Évalue ε_θ(x, t) pour des paramètres nommés donnés.

    Args:
        x (Tensor): Images bruitées (N, C, S, S)
        t (np.ndarray): Pas de temps dans [1, T]
        params (dict): Nom -> valeurs (``UNet.state_dict()`` ou checkpoint)
        cfg (UNetConfig): Configuration du réseau

    Returns:
        Tensor: Bruit prédit, de même forme que ``x``
    """
    modele = UNet(cfg)
    modele.load_state_dict(params)
    return modele(x, t)


class MlpDenoiser(Module):
    """Débruiteur jouet: (x ∈ R², plongement 32) → 64 → 64 → R², activations SiLU."""

    def __init__(self, rng=None, dim_x=2, time_dim=32, cachee=64):
        super().__init__()
        self.time_dim = time_dim
        self.couche1 = Linear(dim_x + time_dim, cachee, rng=rng, activation="silu")
        self.couche2 = Linear(cachee, cachee, rng=rng, activation="silu")
        self.couche3 = Linear(cachee, dim_x, rng=rng)

    def forward(self, x, t):
        t = np.broadcast_to(np.asarray(t), (x.shape[0],))
        h = ad.concat_channels(x, Tensor(time_embed(t, self.time_dim)))
        return self.couche3(self.couche2(self.couche1(h)))
