"""
Module Layers - Couches de réseau et comptage des paramètres

Ce module définit ``Module`` (paramètres nommés, tampons non entraînables,
modes entraînement/évaluation, sauvegarde) et les couches usuelles:
dense, convolution, normalisation par lot, pooling, dropout.

Les noms de couches et le comptage des paramètres suivent la convention
Keras: la normalisation par lot compte ses moyennes mobiles comme
paramètres non entraînables.
"""

from collections import Counter

import numpy as np

from core import autodiff as ad
from core.autodiff import Tensor
from exceptions import CheckpointInvalideError, FormeInvalideError


class Module:
    """
    Classe de base des réseaux.

    Les attributs ``Tensor`` avec ``requires_grad`` sont des paramètres, les
    autres ``Tensor`` sont des tampons (statistiques mobiles). Les sous-modules
    et les listes de sous-modules sont parcourus dans l'ordre d'insertion.

    Attributes:
        entrainement (bool): Mode entraînement (dropout actif, statistiques du lot)
        gele (bool): Paramètres exclus de l'optimisation et comptés non entraînables
    """

    nom_keras = "module"

    def __init__(self):
        self.entrainement = True
        self.gele = False
        self.nom = None

    def _enfants(self):
        for nom, valeur in vars(self).items():
            if isinstance(valeur, (Tensor, Module)):
                yield nom, valeur
            elif isinstance(valeur, list) and valeur and all(isinstance(v, Module) for v in valeur):
                for i, sous_module in enumerate(valeur):
                    yield f"{nom}.{i}", sous_module

    def _tenseurs(self, prefixe="", gele=False):
        gele = gele or self.gele
        for nom, valeur in self._enfants():
            chemin = f"{prefixe}{nom}"
            if isinstance(valeur, Tensor):
                yield chemin, valeur, gele
            else:
                yield from valeur._tenseurs(chemin + ".", gele)

    def parametres(self):
        """Nom -> paramètre, dans l'ordre de construction."""
        return {nom: t for nom, t, _ in self._tenseurs() if t.requires_grad}

    def parametres_entrainables(self):
        return {nom: t for nom, t, gele in self._tenseurs() if t.requires_grad and not gele}

    def tampons(self):
        return {nom: t for nom, t, _ in self._tenseurs() if not t.requires_grad}

    def count_parameters(self):
        """
        Compte les paramètres à la manière de Keras.

        Returns:
            tuple: (entraînables, non entraînables)
        """
        entrainables = non_entrainables = 0
        for _, tenseur, gele in self._tenseurs():
            if tenseur.requires_grad and not gele:
                entrainables += tenseur.data.size
            else:
                non_entrainables += tenseur.data.size
        return entrainables, non_entrainables

    def state_dict(self):
        """Nom -> copie des valeurs (paramètres et tampons)."""
        return {nom: t.data.copy() for nom, t, _ in self._tenseurs()}

    def load_state_dict(self, entrees, strict=True):
        """
        Charge des valeurs nommées dans le module.

        Raises:
            CheckpointInvalideError: Si des noms manquent ou sont en trop (mode strict)
            FormeInvalideError: Si une forme ne correspond pas
        """
        cibles = {nom: t for nom, t, _ in self._tenseurs()}
        manquants = [n for n in cibles if n not in entrees]
        inconnus = [n for n in entrees if n not in cibles and not n.startswith("meta.")]
        if strict and (manquants or inconnus):
            raise CheckpointInvalideError(f"entrées manquantes {manquants[:5]}, inconnues {inconnus[:5]}")
        for nom, tenseur in cibles.items():
            if nom not in entrees:
                continue
            valeur = np.asarray(entrees[nom])
            if valeur.shape != tenseur.shape:
                raise FormeInvalideError(f"{nom}: forme {valeur.shape}, attendu {tenseur.shape}")
            tenseur.data = valeur.astype(tenseur.data.dtype)

    def train(self):
        self._regler_mode(True)
        return self

    def eval(self):
        self._regler_mode(False)
        return self

    def _regler_mode(self, entrainement):
        self.entrainement = entrainement
        for _, enfant in self._enfants():
            if isinstance(enfant, Module):
                enfant._regler_mode(entrainement)

    def astype(self, dtype):
        """Convertit toutes les valeurs (utilisé pour les vérifications en float64)."""
        for _, tenseur, _ in self._tenseurs():
            tenseur.data = tenseur.data.astype(dtype)
        return self

    def forme_sortie(self, forme):
        """Forme de sortie (sans l'axe du lot) pour une forme d'entrée donnée."""
        return forme

    def __call__(self, *args, **kwargs):
        return self.forward(*args, **kwargs)


def _glorot(rng, forme, fan_in, fan_out):
    limite = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniforme(forme, -limite, limite)


def _parametre(valeur, nom):
    return Tensor(valeur, requires_grad=True, nom=nom)


def _activer(y, activation):
    if activation is None:
        return y
    if activation == "relu":
        return ad.relu(y)
    if activation == "silu":
        return ad.silu(y)
    if activation == "leaky_relu":
        return ad.leaky_relu(y)
    raise ValueError(f"activation inconnue: {activation}")


class Linear(Module):
    """Couche dense; poids de forme (entrée, sortie), initialisation Glorot uniforme.

    Sans ``rng``, les poids sont nuls (construction rapide pour le comptage).
    """

    nom_keras = "dense"

    def __init__(self, entree, sortie, rng=None, activation=None):
        super().__init__()
        forme = (entree, sortie)
        valeurs = np.zeros(forme) if rng is None else _glorot(rng, forme, entree, sortie)
        self.poids = _parametre(valeurs, "poids")
        self.biais = _parametre(np.zeros(sortie), "biais")
        self.activation = activation

    def forward(self, x, rng=None):
        return _activer(ad.linear(x, self.poids, self.biais), self.activation)

    def forme_sortie(self, forme):
        return forme[:-1] + (self.poids.shape[1],)


class Conv2d(Module):
    """Convolution de pas 1, noyaux (sortie, entrée, k, k), bourrage « same » par défaut."""

    nom_keras = "conv2d"

    def __init__(self, entree, sortie, noyau=3, rng=None, activation=None, padding=None):
        super().__init__()
        forme = (sortie, entree, noyau, noyau)
        if rng is None:
            valeurs = np.zeros(forme)
        else:
            valeurs = _glorot(rng, forme, entree * noyau * noyau, sortie * noyau * noyau)
        self.poids = _parametre(valeurs, "poids")
        self.biais = _parametre(np.zeros(sortie), "biais")
        self.padding = noyau // 2 if padding is None else padding
        self.activation = activation

    def forward(self, x, rng=None):
        return _activer(ad.conv2d(x, self.poids, self.biais, self.padding), self.activation)

    def forme_sortie(self, forme):
        k = self.poids.shape[2]
        c, h, w = forme
        return (self.poids.shape[0], h + 2 * self.padding - k + 1, w + 2 * self.padding - k + 1)


class BatchNorm(Module):
    """
    Normalisation par lot (2D ou 4D) avec moyennes mobiles non entraînables.

    Les moyennes mobiles suivent Keras: ``mobile = momentum * mobile + (1 - momentum) * lot``.
    """

    nom_keras = "batch_normalization"

    def __init__(self, canaux, momentum=0.99, eps=1e-3):
        super().__init__()
        self.gamma = _parametre(np.ones(canaux), "gamma")
        self.beta = _parametre(np.zeros(canaux), "beta")
        self.moyenne_mobile = Tensor(np.zeros(canaux), nom="moyenne_mobile")
        self.variance_mobile = Tensor(np.ones(canaux), nom="variance_mobile")
        self.momentum = momentum
        self.eps = eps

    def forward(self, x, rng=None):
        if self.entrainement:
            y, moyenne, variance = ad.batch_norm(x, self.gamma, self.beta, None, None, self.eps)
            m = self.momentum
            self.moyenne_mobile.data = (m * self.moyenne_mobile.data + (1 - m) * moyenne).astype(
                self.moyenne_mobile.data.dtype
            )
            self.variance_mobile.data = (m * self.variance_mobile.data + (1 - m) * variance).astype(
                self.variance_mobile.data.dtype
            )
            return y
        y, _, _ = ad.batch_norm(
            x, self.gamma, self.beta, self.moyenne_mobile.data, self.variance_mobile.data, self.eps
        )
        return y


class MaxPool2(Module):
    nom_keras = "max_pooling2d"

    def forward(self, x, rng=None):
        return ad.max_pool2(x)

    def forme_sortie(self, forme):
        c, h, w = forme
        return (c, h // 2, w // 2)


class Flatten(Module):
    nom_keras = "flatten"

    def forward(self, x, rng=None):
        return ad.flatten(x)

    def forme_sortie(self, forme):
        return (int(np.prod(forme)),)


class Dropout(Module):
    """Dropout inversé, actif seulement en mode entraînement."""

    nom_keras = "dropout"

    def __init__(self, taux=0.5):
        super().__init__()
        self.taux = taux

    def forward(self, x, rng=None):
        if not self.entrainement or self.taux <= 0.0:
            return x
        if rng is None:
            raise ValueError("dropout en entraînement sans flux aléatoire")
        return ad.dropout(x, self.taux, rng)


class Sequentiel(Module):
    """
    Pile de couches nommées à la manière de Keras (``conv2d``, ``conv2d_1``, ...).

    Attributes:
        couches (list): Couches dans l'ordre d'application
        forme_entree (tuple): Forme d'une entrée sans l'axe du lot (C, H, W)

    Example:
        >>> modele = Sequentiel([Flatten(), Linear(4, 2)], forme_entree=(1, 2, 2))
        >>> modele.summary()[-1]
        ('dense', (2,), 10)
    """

    nom_keras = "sequential"

    def __init__(self, couches, forme_entree, nom=None):
        super().__init__()
        self.couches = list(couches)
        self.forme_entree = tuple(forme_entree)
        self.nom = nom
        compteurs = Counter()
        for couche in self.couches:
            if couche.nom is None:
                base = couche.nom_keras
                couche.nom = base if compteurs[base] == 0 else f"{base}_{compteurs[base]}"
                compteurs[base] += 1

    def forward(self, x, rng=None, jusqu_a=None):
        """
        Applique les couches.

        Args:
            x (Tensor): Entrée (N, C, H, W)
            rng (RngStream, optional): Flux pour le dropout en entraînement
            jusqu_a (int, optional): Nombre de couches à appliquer (toutes par défaut)
        """
        if x.shape[1:] != self.forme_entree:
            raise FormeInvalideError(f"entrée {x.shape[1:]}, attendu {self.forme_entree}")
        for couche in self.couches[:jusqu_a]:
            x = couche(x, rng=rng)
        return x

    def forme_sortie(self, forme=None):
        forme = self.forme_entree if forme is None else forme
        for couche in self.couches:
            forme = couche.forme_sortie(forme)
        return forme

    def summary(self):
        """
        Lignes (nom, forme de sortie, paramètres), une par couche de premier niveau.

        Returns:
            list: Tuples ``(nom, forme, nb_parametres)``
        """
        lignes, forme = [], self.forme_entree
        for couche in self.couches:
            forme = couche.forme_sortie(forme)
            lignes.append((couche.nom, _format_keras(forme), sum(couche.count_parameters())))
        return lignes


def _format_keras(forme):
    """(C, H, W) NCHW -> (H, W, C) comme dans un résumé Keras."""
    if len(forme) == 3:
        c, h, w = forme
        return (h, w, c)
    return tuple(forme)
