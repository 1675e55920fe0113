"""
Module Pggan - GAN à croissance progressive

Un couple générateur/discriminateur par classe, qui grandit de 4×4 jusqu'à la
résolution cible. Chaque nouveau niveau entre par un fondu
``α·nouveau + (1−α)·suréchantillonné(ancien)``. Toutes les couches utilisent le
taux d'apprentissage égalisé (poids N(0, 1) multipliés par √(2/fan_in) à
chaque passe avant). Deux pertes sont disponibles: logistique et Wasserstein
(avec pénalité de gradient).
"""

import csv
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from core import autodiff as ad
from core.autodiff import Graph, Tensor, backpropagate, input_gradients, no_grad
from core.corpus import agrandir_plus_proche, reduire_moyenne
from core.layers import Module
from core.optim import Adam
from exceptions import (
    CroissanceInvalideError,
    EntrainementInstableError,
    FormeInvalideError,
    GanError,
    JeuDonneesInsuffisantError,
    ProbabiliteInvalideError,
)

logger = logging.getLogger(__name__)

MODES_PERTE = ("logistic", "wasserstein")
PERTES_GENERATEUR = ("saturating", "non_saturating")


@dataclass(frozen=True)
class GanConfig:
    """
    Configuration du GAN progressif.

    Attributes:
        latent_dim (int): Dimension du code latent N(0, I)
        filters_by_resolution (dict): Filtres imposés par résolution (remplace la règle 128/64)
        filters_below_64 (int): Filtres sous 64 pixels
        filters_from_64 (int): Filtres à partir de 64 pixels
        batch_size (int): Taille de lot
        loss_mode (str): ``"logistic"`` ou ``"wasserstein"``
        gp_lambda (float): Poids de la pénalité de gradient (Wasserstein)
        steps_per_stage (int): Pas d'optimisation par étage (moitié fondu, moitié stabilisation)
        lr (float): Taux d'apprentissage Adam
        beta1 (float): β1 d'Adam
        beta2 (float): β2 d'Adam
        target_resolution (int): Résolution finale
        generator_loss (str): ``"saturating"`` (log(1 − D(G(z)))) ou ``"non_saturating"``
        gp_step (float): Pas de la différence centrée utilisée pour le gradient de la pénalité
        ema_decay (float): Décroissance de la moyenne mobile des poids du générateur
            sauvegardée en fin d'entraînement (0 désactive la moyenne)
    """

    latent_dim: int = 64
    filters_by_resolution: dict = field(default_factory=dict)
    filters_below_64: int = 128
    filters_from_64: int = 64
    batch_size: int = 4
    loss_mode: str = "wasserstein"
    gp_lambda: float = 10.0
    steps_per_stage: int = 400
    lr: float = 1e-3
    beta1: float = 0.0
    beta2: float = 0.99
    target_resolution: int = 32
    generator_loss: str = "saturating"
    gp_step: float = 1e-2
    ema_decay: float = 0.0

    def __post_init__(self):
        if self.batch_size < 2:
            raise GanError(f"batch_size doit être ≥ 2, reçu {self.batch_size}")
        if self.latent_dim < 2:
            raise GanError(f"latent_dim doit être ≥ 2, reçu {self.latent_dim}")
        if self.loss_mode not in MODES_PERTE:
            raise GanError(f"loss_mode inconnu: {self.loss_mode}")
        if self.generator_loss not in PERTES_GENERATEUR:
            raise GanError(f"generator_loss inconnu: {self.generator_loss}")
        if self.steps_per_stage < 2:
            raise GanError("steps_per_stage doit être ≥ 2 (fondu puis stabilisation)")
        r = self.target_resolution
        if r < 4 or r & (r - 1):
            raise GanError(f"target_resolution doit être une puissance de deux ≥ 4, reçu {r}")
        if self.gp_lambda < 0 or self.lr <= 0:
            raise GanError("gp_lambda ≥ 0 et lr > 0 attendus")
        if not 0.0 <= self.ema_decay < 1.0:
            raise GanError(f"ema_decay doit être dans [0, 1[, reçu {self.ema_decay}")

    def filtres(self, resolution):
        if resolution in self.filters_by_resolution:
            return int(self.filters_by_resolution[resolution])
        return self.filters_below_64 if resolution < 64 else self.filters_from_64


@dataclass(frozen=True)
class ProgressiveStage:
    """Étage courant: résolution 4·2^k, coefficient de fondu, pas effectués."""

    resolution: int = 4
    fade_alpha: float = 1.0
    steps_in_stage: int = 0


@dataclass
class LossTrace:
    """Trace des pertes, une ligne par pas d'optimisation (ajout seulement)."""

    lignes: list = field(default_factory=list)

    def ajouter(self, etape, resolution, alpha, d_loss, g_loss):
        self.lignes.append({"step": etape, "stage": resolution, "alpha": alpha,
                            "d_loss": d_loss, "g_loss": g_loss})

    def __len__(self):
        return len(self.lignes)

    def to_csv(self, chemin):
        """Écrit ``step,stage,alpha,d_loss,g_loss``."""
        with open(chemin, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=["step", "stage", "alpha", "d_loss", "g_loss"])
            writer.writeheader()
            writer.writerows(self.lignes)


# ----------------------------------------------------------------------
# Couches à taux d'apprentissage égalisé
# ----------------------------------------------------------------------
def echelle_egalisee(fan_in):
    if fan_in <= 0:
        raise FormeInvalideError(f"fan_in doit être > 0, reçu {fan_in}")
    return math.sqrt(2.0 / fan_in)


def equalized_forward(raw_weights, fan_in, entree, biais=None):
    """
    Applique une couche avec poids effectifs ``raw_weights · √(2/fan_in)``.

    Args:
        raw_weights (Tensor): Poids bruts (entrée, sortie) ou (O, C, k, k)
        fan_in (int): k·k·C pour une convolution, nombre d'entrées pour une dense
        entree (Tensor): Entrée de la couche
        biais (Tensor, optional): Biais

    Returns:
        Tensor: Sortie de la couche
    """
    poids = ad.mul_scalar(raw_weights, echelle_egalisee(fan_in))
    if raw_weights.ndim == 4:
        return ad.conv2d(entree, poids, biais, padding=raw_weights.shape[2] // 2)
    return ad.linear(entree, poids, biais)


class EqualizedConv2d(Module):
    def __init__(self, entree, sortie, noyau, rng=None):
        super().__init__()
        forme = (sortie, entree, noyau, noyau)
        valeurs = np.zeros(forme) if rng is None else rng.normale(forme)
        self.poids = Tensor(valeurs, requires_grad=True, nom="poids")
        self.biais = Tensor(np.zeros(sortie), requires_grad=True, nom="biais")
        self.fan_in = entree * noyau * noyau

    def forward(self, x):
        return equalized_forward(self.poids, self.fan_in, x, self.biais)


class EqualizedLinear(Module):
    def __init__(self, entree, sortie, rng=None):
        super().__init__()
        valeurs = np.zeros((entree, sortie)) if rng is None else rng.normale((entree, sortie))
        self.poids = Tensor(valeurs, requires_grad=True, nom="poids")
        self.biais = Tensor(np.zeros(sortie), requires_grad=True, nom="biais")
        self.fan_in = entree

    def forward(self, x):
        return equalized_forward(self.poids, self.fan_in, x, self.biais)


def melange_fondu(nouveau, ancien, alpha):
    """α·nouveau + (1−α)·suréchantillonné(ancien); ``ancien`` est à la demi-résolution."""
    return _interpoler(nouveau, ad.upsample_nearest2x(ancien), alpha)


def _interpoler(nouveau, ancien, alpha):
    if alpha >= 1.0:
        return nouveau
    if alpha <= 0.0:
        return ancien
    return ad.add(ad.mul_scalar(nouveau, alpha), ad.mul_scalar(ancien, 1.0 - alpha))


# ----------------------------------------------------------------------
# Réseaux
# ----------------------------------------------------------------------
class BlocGenerateur(Module):
    """Suréchantillonnage ×2 puis deux convolutions 3×3 leaky-ReLU."""

    def __init__(self, entree, sortie, rng=None):
        super().__init__()
        self.conv1 = EqualizedConv2d(entree, sortie, 3, rng)
        self.conv2 = EqualizedConv2d(sortie, sortie, 3, rng)

    def forward(self, h):
        h = ad.upsample_nearest2x(h)
        return ad.leaky_relu(self.conv2(ad.leaky_relu(self.conv1(h))))


class BlocDiscriminateur(Module):
    """Deux convolutions 3×3 leaky-ReLU puis pooling moyen 2×2."""

    def __init__(self, entree, sortie, rng=None):
        super().__init__()
        self.conv1 = EqualizedConv2d(entree, entree, 3, rng)
        self.conv2 = EqualizedConv2d(entree, sortie, 3, rng)

    def forward(self, h):
        return ad.avg_pool2(ad.leaky_relu(self.conv2(ad.leaky_relu(self.conv1(h)))))


class Generateur(Module):
    """
    Générateur progressif: z → dense 4×4 → blocs de croissance → toRGB 1×1 → tanh.

    Example:
        >>> gen = Generateur(GanConfig(), derive_stream(0, 0))
        >>> gen(Tensor(np.zeros((2, 64)))).shape
        (2, 1, 4, 4)
    """

    def __init__(self, cfg, rng=None):
        super().__init__()
        self.cfg = cfg
        f = cfg.filtres(4)
        self.latent = EqualizedLinear(cfg.latent_dim, f * 16, rng)
        self.conv_base = EqualizedConv2d(f, f, 3, rng)
        self.blocs = []
        self.vers_image = [EqualizedConv2d(f, 1, 1, rng)]

    @property
    def resolution(self):
        return 4 * 2 ** len(self.blocs)

    def grandir(self, rng=None):
        nouvelle = self.resolution * 2
        self.blocs.append(BlocGenerateur(self.cfg.filtres(nouvelle // 2), self.cfg.filtres(nouvelle), rng))
        self.vers_image.append(EqualizedConv2d(self.cfg.filtres(nouvelle), 1, 1, rng))

    def forward(self, z, alpha=1.0):
        if z.ndim != 2 or z.shape[1] != self.cfg.latent_dim:
            raise FormeInvalideError(f"code latent {z.shape}, attendu (N, {self.cfg.latent_dim})")
        h = ad.leaky_relu(self.latent(z))
        h = ad.reshape(h, (z.shape[0], self.cfg.filtres(4), 4, 4))
        h = ad.leaky_relu(self.conv_base(h))
        precedent = h
        for bloc in self.blocs:
            precedent = h
            h = bloc(h)
        nouveau = ad.tanh(self.vers_image[-1](h))
        if not self.blocs or alpha >= 1.0:
            return nouveau
        ancien = ad.tanh(self.vers_image[-2](precedent))
        return melange_fondu(nouveau, ancien, alpha)


class Discriminateur(Module):
    """Discriminateur progressif, miroir du générateur; sortie (N, 1) non bornée."""

    def __init__(self, cfg, rng=None):
        super().__init__()
        self.cfg = cfg
        f = cfg.filtres(4)
        self.depuis_image = [EqualizedConv2d(1, f, 1, rng)]
        self.blocs = []
        self.conv_finale = EqualizedConv2d(f, f, 3, rng)
        self.dense = EqualizedLinear(f * 16, f, rng)
        self.sortie = EqualizedLinear(f, 1, rng)

    @property
    def resolution(self):
        return 4 * 2 ** len(self.blocs)

    def grandir(self, rng=None):
        nouvelle = self.resolution * 2
        self.depuis_image.append(EqualizedConv2d(1, self.cfg.filtres(nouvelle), 1, rng))
        self.blocs.append(BlocDiscriminateur(self.cfg.filtres(nouvelle), self.cfg.filtres(nouvelle // 2), rng))

    def forward(self, x, alpha=1.0):
        r = self.resolution
        if x.ndim != 4 or x.shape[1:] != (1, r, r):
            raise FormeInvalideError(f"discriminateur: entrée {x.shape}, attendu (N, 1, {r}, {r})")
        k = len(self.blocs)
        h = ad.leaky_relu(self.depuis_image[k](x))
        if k:
            h = self.blocs[k - 1](h)
            if alpha < 1.0:
                ancien = ad.leaky_relu(self.depuis_image[k - 1](ad.avg_pool2(x)))
                h = _interpoler(h, ancien, alpha)
            for bloc in reversed(self.blocs[:k - 1]):
                h = bloc(h)
        h = ad.leaky_relu(self.conv_finale(h))
        h = ad.leaky_relu(self.dense(ad.flatten(h)))
        return self.sortie(h)


def grow_stage(gen, disc, stage, cfg, rng=None):
    """
    Ajoute un niveau de résolution aux deux réseaux.

    Args:
        gen (Generateur): Générateur
        disc (Discriminateur): Discriminateur
        stage (ProgressiveStage): Étage terminé (fondu à 1.0)
        cfg (GanConfig): Configuration (résolution cible)
        rng (RngStream, optional): Initialisation des nouvelles couches

    Returns:
        tuple: (gen, disc, nouvel étage à α = 0)

    Raises:
        CroissanceInvalideError: Fondu inachevé ou résolution cible dépassée
    """
    if stage.fade_alpha != 1.0:
        raise CroissanceInvalideError(f"fondu inachevé (α={stage.fade_alpha})")
    if stage.resolution * 2 > cfg.target_resolution:
        raise CroissanceInvalideError(
            f"croissance au-delà de la résolution cible {cfg.target_resolution}"
        )
    gen.grandir(None if rng is None else rng.derive(0))
    disc.grandir(None if rng is None else rng.derive(1))
    logger.debug("croissance vers %dx%d", gen.resolution, gen.resolution)
    return gen, disc, ProgressiveStage(stage.resolution * 2, 0.0, 0)


# ----------------------------------------------------------------------
# Pertes
# ----------------------------------------------------------------------
def gan_loss(d_real, d_fake, mode):
    """
    Pertes adverses sur des scores déjà calculés.

    logistic: L_D = log D(x) + log(1 − D(G(z))) (maximisée), L_G = log(1 − D(G(z)));
    wasserstein: L_D = mean(d_fake) − mean(d_real), L_G = −mean(d_fake).

    Args:
        d_real (array): Scores des vraies images (probabilités en mode logistique)
        d_fake (array): Scores des images générées
        mode (str): ``"logistic"`` ou ``"wasserstein"``

    Returns:
        tuple: (L_D, L_G)

    Raises:
        ProbabiliteInvalideError: Probabilité logistique hors de ]0, 1[

    Example:
        >>> gan_loss([0.5], [0.5], "logistic")[0]
        -1.3862943611198906
    """
    d_real = np.asarray(d_real, dtype=np.float64)
    d_fake = np.asarray(d_fake, dtype=np.float64)
    if d_real.size == 0 or d_fake.size == 0:
        raise GanError("lots de scores vides")
    if mode == "logistic":
        for scores in (d_real, d_fake):
            if np.any(scores <= 0.0) or np.any(scores >= 1.0):
                raise ProbabiliteInvalideError("probabilités logistiques hors de ]0, 1[")
        l_g = float(np.mean(np.log1p(-d_fake)))
        return float(np.mean(np.log(d_real))) + l_g, l_g
    if mode == "wasserstein":
        return float(np.mean(d_fake) - np.mean(d_real)), float(-np.mean(d_fake))
    raise GanError(f"mode de perte inconnu: {mode}")


def perte_discriminateur(d_reel, d_faux, mode):
    """Objectif minimisé par D, à partir des sorties brutes (logits en logistique)."""
    if mode == "logistic":
        return ad.mul_scalar(ad.add(ad.mean(ad.log_sigmoid(d_reel)),
                                    ad.mean(ad.log_sigmoid(ad.mul_scalar(d_faux, -1.0)))), -1.0)
    return ad.sub(ad.mean(d_faux), ad.mean(d_reel))


def perte_generateur(d_faux, mode, generator_loss="saturating"):
    """Objectif minimisé par G."""
    if mode == "logistic":
        if generator_loss == "non_saturating":
            return ad.mul_scalar(ad.mean(ad.log_sigmoid(d_faux)), -1.0)
        return ad.mean(ad.log_sigmoid(ad.mul_scalar(d_faux, -1.0)))
    return ad.mul_scalar(ad.mean(d_faux), -1.0)


def gradient_penalty(disc, real, fake, rng, lam=10.0, alpha=1.0, pas=1e-2):
    """
    Pénalité de gradient λ·mean((‖∇_x D(x̂)‖ − 1)²) aux interpolés x̂.

    La valeur est exacte (gradient d'entrée par rétropropagation). Son gradient
    par rapport aux paramètres est la dérivée de
    S = Σ_i 2λ(n_i − 1)/N · [D(x̂_i + h·v̂_i) − D(x̂_i − h·v̂_i)] / 2h,
    où v̂_i est la direction (figée) du gradient d'entrée et n_i sa norme:
    ∂S/∂θ coïncide avec le gradient de la pénalité pour un discriminateur
    linéaire par morceaux loin des coudes.

    Args:
        disc (Module): Discriminateur ``disc(x, alpha) -> (N, 1)``
        real (np.ndarray): Vraies images
        fake (np.ndarray): Images générées
        rng (RngStream): Flux des coefficients d'interpolation
        lam (float): Poids λ
        alpha (float): Fondu courant
        pas (float): h

    Returns:
        tuple: (valeur, dict nom -> gradient des paramètres entraînables)
    """
    n = real.shape[0]
    eps = rng.uniforme((n,) + (1,) * (real.ndim - 1))
    interpoles = Tensor(eps * real + (1.0 - eps) * fake, requires_grad=True)
    parametres = disc.parametres_entrainables()

    graphe = Graph(parametres=parametres)
    with graphe.enregistrer():
        score = ad.sum(disc(interpoles, alpha))
    (gradient,) = input_gradients(graphe, score, [interpoles])
    normes = np.sqrt(np.sum(gradient.reshape(n, -1).astype(np.float64) ** 2, axis=1))
    valeur = float(lam * np.mean((normes - 1.0) ** 2))

    directions = np.zeros_like(gradient, dtype=np.float64)
    actifs = normes > 0
    directions[actifs] = gradient[actifs] / normes[actifs].reshape((-1,) + (1,) * (real.ndim - 1))
    poids = (2.0 * lam * (normes - 1.0) / n / (2.0 * pas)).reshape(n, 1)

    graphe = Graph(parametres=parametres)
    with graphe.enregistrer():
        plus = disc(Tensor(interpoles.data + pas * directions), alpha)
        moins = disc(Tensor(interpoles.data - pas * directions), alpha)
        surrogat = ad.sum(ad.mul(ad.sub(plus, moins), Tensor(poids)))
    return valeur, backpropagate(graphe, surrogat)


# ----------------------------------------------------------------------
# Entraînement
# ----------------------------------------------------------------------
def _reels_etage(images, resolution, alpha):
    reels = reduire_moyenne(images, images.shape[-1] // resolution)
    if alpha < 1.0:
        reels = alpha * reels + (1.0 - alpha) * agrandir_plus_proche(reduire_moyenne(reels, 2), 2)
    return reels


def _pas_discriminateur(gen, disc, optimiseur, reels, cfg, alpha, flux):
    z = Tensor(flux.normale((len(reels), cfg.latent_dim)))
    with no_grad():
        faux = gen(z, alpha).data
    graphe = Graph(parametres=optimiseur.parametres)
    with graphe.enregistrer():
        perte = perte_discriminateur(disc(Tensor(reels), alpha), disc(Tensor(faux), alpha), cfg.loss_mode)
    valeur = perte.item()
    if not np.isfinite(valeur):
        return valeur
    gradients = backpropagate(graphe, perte)
    if cfg.loss_mode == "wasserstein" and cfg.gp_lambda > 0:
        penalite, gradients_gp = gradient_penalty(disc, reels, faux, flux, cfg.gp_lambda, alpha, cfg.gp_step)
        valeur += penalite
        gradients = {nom: g + gradients_gp[nom] for nom, g in gradients.items()}
    if np.isfinite(valeur):
        optimiseur.pas(gradients)
    return valeur


def _pas_generateur(gen, disc, optimiseur, cfg, alpha, flux):
    z = Tensor(flux.normale((cfg.batch_size, cfg.latent_dim)))
    graphe = Graph(parametres=optimiseur.parametres)
    with graphe.enregistrer():
        perte = perte_generateur(disc(gen(z, alpha), alpha), cfg.loss_mode, cfg.generator_loss)
    valeur = perte.item()
    if np.isfinite(valeur):
        optimiseur.pas(backpropagate(graphe, perte))
    return valeur


def _suivre_moyenne(moyenne, gen, decroissance):
    """Moyenne mobile des poids; un paramètre ajouté par croissance y entre avec sa valeur courante."""
    for nom, parametre in gen.parametres_entrainables().items():
        if nom in moyenne:
            moyenne[nom] = decroissance * moyenne[nom] + (1.0 - decroissance) * parametre.data
        else:
            moyenne[nom] = parametre.data.copy()


def train_pggan(images, cfg, rng, afficher_progression=False, description="PGGAN"):
    """
    Entraîne un GAN progressif sur les images d'une seule classe.

    Un pas de discriminateur alterne avec un pas de générateur. L'étage 4×4
    s'entraîne à α = 1; chaque étage suivant fond pendant sa première moitié
    puis se stabilise.

    Avec ``ema_decay`` > 0, le checkpoint contient la moyenne mobile des poids
    du générateur plutôt que ses derniers poids.

    Sur un jeu dégénéré (une seule image répétée), seul le mode Wasserstein
    rapproche la sortie moyenne de l'image; la perte logistique saturante
    reste loin (gradient du générateur évanescent dès que D sépare les lots).

    Args:
        images (np.ndarray): Images (N, 1, S, S) dans [−1, 1], S puissance de deux
        cfg (GanConfig): Configuration
        rng (RngStream): Flux (initialisation, lots, codes latents)
        afficher_progression (bool): Barre de progression tqdm

    Returns:
        tuple: (entrées de checkpoint du générateur, LossTrace)

    Raises:
        JeuDonneesInsuffisantError: Moins d'images que la taille de lot
        EntrainementInstableError: Perte non finie (la trace partielle est jointe)
    """
    images = np.asarray(images, dtype=np.float32)
    if len(images) < cfg.batch_size:
        raise JeuDonneesInsuffisantError(f"{len(images)} images pour un lot de {cfg.batch_size}")
    cote = images.shape[-1]
    if images.ndim != 4 or images.shape[1:] != (1, cote, cote) or cote & (cote - 1):
        raise FormeInvalideError(f"images carrées monocanal en puissance de deux attendues: {images.shape}")
    if cfg.target_resolution > cote:
        raise CroissanceInvalideError(f"résolution cible {cfg.target_resolution} > images {cote}")

    gen = Generateur(cfg, rng.derive(0))
    disc = Discriminateur(cfg, rng.derive(1))
    flux = rng.derive(2)
    trace = LossTrace()
    stage = ProgressiveStage(4, 1.0, 0)
    moyenne = {}
    nb_etages = int(math.log2(cfg.target_resolution // 4)) + 1
    moitie = cfg.steps_per_stage // 2
    barre = tqdm(total=nb_etages * cfg.steps_per_stage, desc=description,
                 disable=not afficher_progression)
    etape = 0
    for k in range(nb_etages):
        if k:
            gen, disc, stage = grow_stage(gen, disc, stage, cfg, rng.derive(10 + k))
        opt_g = Adam(gen.parametres_entrainables(), cfg.lr, cfg.beta1, cfg.beta2)
        opt_d = Adam(disc.parametres_entrainables(), cfg.lr, cfg.beta1, cfg.beta2)
        for s in range(cfg.steps_per_stage):
            alpha = 1.0 if k == 0 else min(1.0, s / moitie)
            stage = ProgressiveStage(stage.resolution, alpha, s)
            lot = images[flux.permutation(len(images))[:cfg.batch_size]]
            reels = _reels_etage(lot, stage.resolution, alpha)
            d_perte = _pas_discriminateur(gen, disc, opt_d, reels, cfg, alpha, flux)
            g_perte = _pas_generateur(gen, disc, opt_g, cfg, alpha, flux)
            if cfg.ema_decay > 0:
                _suivre_moyenne(moyenne, gen, cfg.ema_decay)
            trace.ajouter(etape, stage.resolution, alpha, d_perte, g_perte)
            etape += 1
            barre.update(1)
            if not (np.isfinite(d_perte) and np.isfinite(g_perte)):
                barre.close()
                logger.error("[ERREUR PGGAN] perte non finie au pas %d (%dx%d)", etape, stage.resolution,
                             stage.resolution)
                raise EntrainementInstableError(f"perte non finie au pas {etape - 1}", trace=trace)
        stage = ProgressiveStage(stage.resolution, 1.0, cfg.steps_per_stage)
        logger.info("%s: étage %dx%d terminé (D=%.4f, G=%.4f)", description, stage.resolution,
                    stage.resolution, trace.lignes[-1]["d_loss"], trace.lignes[-1]["g_loss"])
    barre.close()
    entrees = gen.state_dict()
    entrees.update(moyenne)
    entrees["meta.resolution"] = np.array([gen.resolution], dtype=np.float32)
    entrees["meta.latent_dim"] = np.array([cfg.latent_dim], dtype=np.float32)
    return entrees, trace


def charger_generateur(entrees, cfg):
    """Reconstruit un générateur à partir d'entrées de checkpoint (``meta.resolution``)."""
    if "meta.resolution" not in entrees:
        raise GanError("checkpoint de générateur sans meta.resolution")
    if int(entrees.get("meta.latent_dim", [cfg.latent_dim])[0]) != cfg.latent_dim:
        raise GanError("latent_dim du checkpoint différent de la configuration")
    resolution = int(entrees["meta.resolution"][0])
    gen = Generateur(cfg)
    while gen.resolution < resolution:
        gen.grandir()
    gen.load_state_dict(entrees)
    return gen.eval()


def generate(gen, count, rng, taille_lot=64):
    """Échantillonne ``count`` images (count, 1, S, S) dans [−1, 1] à α = 1."""
    sorties = []
    with no_grad():
        for debut in range(0, count, taille_lot):
            n = min(taille_lot, count - debut)
            sorties.append(gen(Tensor(rng.normale((n, gen.cfg.latent_dim)))).data)
    return np.concatenate(sorties).astype(np.float32)
