"""
Module Diffusion - Mathématiques du DDPM

Ordonnancement du bruit, processus avant (pas à pas et marginale fermée),
objectif d'entraînement E‖ε − ε_θ(x_t, t)‖² et échantillonnage ancestral.
Les pas de temps sont numérotés de 1 à T; les tableaux du schedule sont
indexés par t − 1.
"""

import logging
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from core import autodiff as ad
from core.autodiff import Graph, Tensor, backpropagate, no_grad
from core.denoiser import UNet, UNetConfig
from core.optim import Adam
from exceptions import (
    FormeInvalideError,
    OrdonnancementInvalideError,
    PasHorsBornesError,
    ValeurNonFinieError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseSchedule:
    """
    Ordonnancement β_1..β_T avec α_t = 1 − β_t et ᾱ_t = ∏_{s≤t} α_s.

    Attributes:
        T (int): Nombre de pas
        beta (np.ndarray): β_t (float64)
        alpha (np.ndarray): α_t
        alpha_bar (np.ndarray): ᾱ_t, strictement décroissant
    """

    T: int
    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray

    @classmethod
    def depuis_betas(cls, betas):
        """
        Construit un ordonnancement à partir d'une liste explicite de β.

        Raises:
            OrdonnancementInvalideError: Si un β sort de ]0, 1[
        """
        beta = np.asarray(betas, dtype=np.float64)
        if beta.ndim != 1 or beta.size == 0:
            raise OrdonnancementInvalideError("au moins un β est requis")
        if np.any(beta <= 0.0) or np.any(beta >= 1.0):
            raise OrdonnancementInvalideError("chaque β doit être dans ]0, 1[")
        alpha = 1.0 - beta
        alpha_bar = np.empty_like(alpha)
        produit = 1.0
        for i, a in enumerate(alpha):
            produit = produit * a
            alpha_bar[i] = produit
        return cls(T=len(beta), beta=beta, alpha=alpha, alpha_bar=alpha_bar)

    def verifier_pas(self, t):
        t = np.asarray(t)
        if np.any(t < 1) or np.any(t > self.T):
            raise PasHorsBornesError(f"pas hors de [1, {self.T}]: {t}")
        return t.astype(np.int64)


def build_schedule(kind, T, beta_start, beta_end):
    """
    Construit l'ordonnancement du bruit.

    Args:
        kind (str): Forme de l'ordonnancement (``"linear"``)
        T (int): Nombre de pas (≥ 1)
        beta_start (float): Premier β
        beta_end (float): Dernier β

    Returns:
        NoiseSchedule: β interpolés linéairement, bornes incluses

    Raises:
        OrdonnancementInvalideError: Si les bornes sont invalides

    Example:
        >>> build_schedule("linear", 1, 0.1, 0.1).alpha_bar
        array([0.9])
    """
    if kind != "linear":
        raise OrdonnancementInvalideError(f"ordonnancement inconnu: {kind}")
    if T < 1:
        raise OrdonnancementInvalideError(f"T doit être ≥ 1, reçu {T}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise OrdonnancementInvalideError(
            f"bornes invalides: 0 < {beta_start} <= {beta_end} < 1 attendu"
        )
    return NoiseSchedule.depuis_betas(np.linspace(beta_start, beta_end, T))


def posterior_variance(schedule):
    """β̃_t = (1 − ᾱ_{t−1}) / (1 − ᾱ_t) · β_t, avec ᾱ_0 = 1."""
    precedent = np.concatenate([[1.0], schedule.alpha_bar[:-1]])
    return (1.0 - precedent) / (1.0 - schedule.alpha_bar) * schedule.beta


def _donnees(x):
    return x.data if isinstance(x, Tensor) else np.asarray(x)


def _coefficient(valeurs, t, forme):
    """Coefficient par élément du lot, diffusé sur les autres axes."""
    c = valeurs[t - 1]
    if np.ndim(c) == 0:
        return c
    return c.reshape((-1,) + (1,) * (len(forme) - 1))


@dataclass
class DiffusionBatchSample:
    """Lot bruité: x_t, pas de temps t par élément et bruit ε utilisé."""

    x_t: np.ndarray
    t: np.ndarray
    epsilon: np.ndarray


def forward_step(x_prev, t, schedule, epsilon):
    """
    Un pas avant: x_t = √α_t·x_{t−1} + √(1−α_t)·ε.

    Example:
        >>> s = NoiseSchedule.depuis_betas([0.1])
        >>> forward_step(np.ones(1), 1, s, np.ones(1))
        array([1.26491106])
    """
    x_prev, epsilon = _donnees(x_prev), _donnees(epsilon)
    if x_prev.shape != epsilon.shape:
        raise FormeInvalideError(f"formes {x_prev.shape} et {epsilon.shape} différentes")
    t = schedule.verifier_pas(t)
    a = _coefficient(schedule.alpha, t, x_prev.shape)
    return np.sqrt(a) * x_prev + np.sqrt(1.0 - a) * epsilon


def forward_marginal(x0, t, schedule, epsilon):
    """Marginale fermée: x_t = √ᾱ_t·x_0 + √(1−ᾱ_t)·ε."""
    x0, epsilon = _donnees(x0), _donnees(epsilon)
    if x0.shape != epsilon.shape:
        raise FormeInvalideError(f"formes {x0.shape} et {epsilon.shape} différentes")
    t = schedule.verifier_pas(t)
    ab = _coefficient(schedule.alpha_bar, t, x0.shape)
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * epsilon


def tirer_lot_bruite(x0, schedule, rng):
    """Tire t ~ U{1..T} et ε ~ N(0, I) par élément, puis applique la marginale."""
    x0 = _donnees(x0)
    t = rng.entiers(1, schedule.T + 1, x0.shape[0])
    epsilon = rng.normale(x0.shape)
    return DiffusionBatchSample(forward_marginal(x0, t, schedule, epsilon), t, epsilon)


def ddpm_loss(x0, model, schedule, rng, lot=None):
    """
    Perte du DDPM: moyenne sur tous les éléments de (ε − ε_θ(x_t, t))².

    Args:
        x0 (np.ndarray | Tensor): Lot d'images propres
        model (callable): ``model(Tensor x_t, np.ndarray t) -> Tensor``
        schedule (NoiseSchedule): Ordonnancement
        rng (RngStream): Flux pour t et ε
        lot (DiffusionBatchSample, optional): Lot bruité imposé (tests)

    Returns:
        Tensor: Perte scalaire différentiable à travers ``model``

    Raises:
        FormeInvalideError: Si la sortie du modèle n'a pas la forme de x_t
    """
    lot = lot or tirer_lot_bruite(x0, schedule, rng)
    prediction = model(Tensor(lot.x_t), lot.t)
    if prediction.shape != lot.x_t.shape:
        raise FormeInvalideError(
            f"sortie du modèle {prediction.shape}, attendu {lot.x_t.shape}"
        )
    return ad.mse(prediction, Tensor(lot.epsilon))


def ancestral_sample(model, schedule, count, shape, rng, sigma="beta", clamp=True,
                     x_depart=None, taille_lot=None):
    """
    Échantillonnage ancestral de x_T ~ N(0, I) jusqu'à x_0.

    x_{t−1} = (1/√α_t)·(x_t − ((1−α_t)/√(1−ᾱ_t))·ε_θ(x_t, t)) + σ_t·z,
    avec σ_t = √β_t pour t > 1 et σ_1 = 0.

    Args:
        model (callable): Prédicteur de bruit
        schedule (NoiseSchedule): Ordonnancement
        count (int): Nombre d'échantillons (≥ 1)
        shape (tuple): Forme d'un échantillon
        rng (RngStream): Flux pour x_T et les z
        sigma (str): ``"beta"`` (σ_t² = β_t) ou ``"posterior"`` (σ_t² = β̃_t)
        clamp (bool): Borne la sortie à [−1, 1]
        x_depart (np.ndarray, optional): x_T imposé
        taille_lot (int, optional): Échantillons évalués par appel au modèle

    Returns:
        np.ndarray: Échantillons de forme (count, *shape)

    Raises:
        ValeurNonFinieError: Si une valeur intermédiaire n'est pas finie
    """
    if count < 1:
        raise ValueError(f"count doit être ≥ 1, reçu {count}")
    variances = schedule.beta if sigma == "beta" else posterior_variance(schedule)
    x = rng.normale((count,) + tuple(shape)) if x_depart is None else np.array(x_depart, dtype=np.float64)
    taille_lot = taille_lot or count
    with no_grad():
        for t in range(schedule.T, 0, -1):
            epsilon = np.empty_like(x)
            for debut in range(0, count, taille_lot):
                bloc = x[debut:debut + taille_lot]
                pas = np.full(len(bloc), t, dtype=np.int64)
                epsilon[debut:debut + taille_lot] = model(Tensor(bloc), pas).data
            a, ab = schedule.alpha[t - 1], schedule.alpha_bar[t - 1]
            x = (x - (1.0 - a) / np.sqrt(1.0 - ab) * epsilon) / np.sqrt(a)
            if t > 1:
                x = x + np.sqrt(variances[t - 1]) * rng.normale(x.shape)
            if not np.all(np.isfinite(x)):
                raise ValeurNonFinieError(f"valeur non finie au pas t={t}")
    return np.clip(x, -1.0, 1.0) if clamp else x


@dataclass(frozen=True)
class DdpmConfig:
    """
    Configuration d'entraînement du DDPM (un modèle par classe).

    Attributes:
        timesteps (int): T (200 au bureau; 8000 reproduit le réglage publié)
        beta_start (float): Premier β
        beta_end (float): Dernier β
        epochs (int): Époques d'entraînement
        batch_size (int): Taille de lot
        lr (float): Taux d'apprentissage Adam
        base_channels (int): Canaux du premier niveau du U-Net
        depth (int): Niveaux du U-Net
        time_dim (int): Dimension du plongement temporel
        sample_batch (int): Échantillons par appel au modèle pendant la synthèse
    """

    timesteps: int = 200
    beta_start: float = 1e-4
    beta_end: float = 0.02
    epochs: int = 20
    batch_size: int = 16
    lr: float = 1e-4
    base_channels: int = 32
    depth: int = 2
    time_dim: int = 64
    sample_batch: int = 64

    def __post_init__(self):
        for nom in ("timesteps", "epochs", "batch_size", "base_channels", "depth", "time_dim",
                    "sample_batch"):
            if getattr(self, nom) < 1:
                raise ValueError(f"{nom} doit être ≥ 1")
        if self.lr <= 0:
            raise ValueError("lr doit être > 0")
        if not 0.0 < self.beta_start <= self.beta_end < 1.0:
            raise ValueError("bornes de β invalides")

    def schedule(self):
        return build_schedule("linear", self.timesteps, self.beta_start, self.beta_end)

    def unet(self, taille):
        return UNetConfig(input_size=taille, base_channels=self.base_channels, depth=self.depth,
                          time_dim=self.time_dim)


def entrainer_debruiteur(modele, donnees, schedule, epochs, batch_size, lr, rng,
                         afficher_progression=False, description="DDPM"):
    """
    Entraîne un prédicteur de bruit avec ``ddpm_loss`` et Adam.

    Args:
        modele (Module): Réseau ε_θ
        donnees (np.ndarray): Exemples propres (N, ...)
        schedule (NoiseSchedule): Ordonnancement
        epochs (int): Nombre d'époques
        batch_size (int): Taille de lot
        lr (float): Taux d'apprentissage
        rng (RngStream): Flux (mélange, t et ε)
        afficher_progression (bool): Barre de progression tqdm

    Returns:
        list: Perte moyenne par époque
    """
    optimiseur = Adam(modele.parametres_entrainables(), lr=lr)
    flux_melange, flux_bruit = rng.derive(0), rng.derive(1)
    historique = []
    for epoque in tqdm(range(epochs), desc=description, disable=not afficher_progression):
        ordre = flux_melange.permutation(len(donnees))
        pertes = []
        for debut in range(0, len(donnees), batch_size):
            lot = donnees[ordre[debut:debut + batch_size]]
            graphe = Graph(parametres=optimiseur.parametres)
            with graphe.enregistrer():
                perte = ddpm_loss(lot, modele, schedule, flux_bruit)
            if not np.isfinite(perte.item()):
                raise ValeurNonFinieError(f"perte DDPM non finie à l'époque {epoque}")
            optimiseur.pas(backpropagate(graphe, perte))
            pertes.append(perte.item())
        historique.append(float(np.mean(pertes)))
        logger.debug("%s époque %d: perte %.5f", description, epoque, historique[-1])
    return historique


def train_ddpm(images, cfg, rng, afficher_progression=False, description="DDPM"):
    """
    Entraîne un U-Net DDPM sur les images d'une seule classe.

    Args:
        images (np.ndarray): Images (N, 1, S, S) dans [−1, 1]
        cfg (DdpmConfig): Configuration
        rng (RngStream): Flux (initialisation, puis entraînement)

    Returns:
        tuple: (UNet entraîné, pertes par époque)
    """
    taille = images.shape[-1]
    modele = UNet(cfg.unet(taille), rng=rng.derive(0))
    logger.info("%s: %d images %dx%d, T=%d, %d époques", description, len(images), taille,
                taille, cfg.timesteps, cfg.epochs)
    historique = entrainer_debruiteur(modele, images.astype(np.float32), cfg.schedule(),
                                      cfg.epochs, cfg.batch_size, cfg.lr, rng.derive(1),
                                      afficher_progression, description)
    return modele, historique


def sample_images(model, schedule, count, rng, taille_lot=64):
    """Synthétise ``count`` images (count, C, S, S) dans [−1, 1] avec le U-Net."""
    c = model.cfg
    return ancestral_sample(model, schedule, count, (c.channels, c.input_size, c.input_size), rng,
                            taille_lot=taille_lot).astype(np.float32)
