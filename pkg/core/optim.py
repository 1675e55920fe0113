"""
Module Optim - Optimiseur Adam avec correction de biais
"""

from dataclasses import dataclass, field

import numpy as np

from exceptions import LongueurIncoherenteError, ValeurNonFinieError


@dataclass
class AdamState:
    """
    État d'Adam pour une liste de paramètres.

    Attributes:
        m (list): Premiers moments, un tableau par paramètre
        v (list): Seconds moments
        t (int): Nombre de pas effectués
        beta1 (float): Décroissance du premier moment
        beta2 (float): Décroissance du second moment
        eps_adam (float): Stabilisateur du dénominateur
    """

    m: list = field(default_factory=list)
    v: list = field(default_factory=list)
    t: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps_adam: float = 1e-8

    @classmethod
    def pour(cls, params, beta1=0.9, beta2=0.999, eps_adam=1e-8):
        """Crée un état vierge (moments nuls) ajusté aux paramètres."""
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            beta1=beta1,
            beta2=beta2,
            eps_adam=eps_adam,
        )


def adam_step(params, grads, state, lr):
    """
    Applique un pas d'Adam avec correction de biais.

    Args:
        params (list): Tableaux de paramètres
        grads (list): Gradients correspondants
        state (AdamState): État mis à jour en place (``t`` incrémenté)
        lr (float): Taux d'apprentissage (> 0)

    Returns:
        tuple: (nouveaux paramètres, état)

    Raises:
        LongueurIncoherenteError: Si les longueurs diffèrent
        ValeurNonFinieError: Si un gradient contient NaN ou Inf

    Example:
        >>> etat = AdamState.pour([np.zeros(1)])
        >>> adam_step([np.zeros(1)], [np.ones(1)], etat, 0.1)[0]
        [array([-0.1])]
    """
    if not len(params) == len(grads) == len(state.m) == len(state.v):
        raise LongueurIncoherenteError(
            f"{len(params)} paramètres, {len(grads)} gradients, {len(state.m)} moments"
        )
    if lr <= 0:
        raise ValueError(f"taux d'apprentissage invalide: {lr}")
    for g in grads:
        if not np.all(np.isfinite(g)):
            raise ValeurNonFinieError("gradient non fini passé à Adam")
    state.t += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1 ** state.t
    correction2 = 1.0 - b2 ** state.t
    nouveaux = []
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape or p.shape != state.m[i].shape:
            raise LongueurIncoherenteError(f"paramètre {i}: formes {p.shape} et {g.shape}")
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g
        m_chapeau = state.m[i] / correction1
        v_chapeau = state.v[i] / correction2
        nouveaux.append((p - lr * m_chapeau / (np.sqrt(v_chapeau) + state.eps_adam)).astype(p.dtype))
    return nouveaux, state


class Adam:
    """
    Adam appliqué à des paramètres nommés (``Module.parametres_entrainables()``).

    Example:
        >>> optimiseur = Adam(modele.parametres_entrainables(), lr=1e-4)
        >>> optimiseur.pas(backpropagate(graphe, perte))
    """

    def __init__(self, parametres, lr, beta1=0.9, beta2=0.999, eps_adam=1e-8):
        self.parametres = dict(parametres)
        self.lr = lr
        self.etat = AdamState.pour(
            [p.data for p in self.parametres.values()], beta1, beta2, eps_adam
        )

    def pas(self, gradients):
        """Met à jour les paramètres à partir d'un dict nom -> gradient."""
        noms = list(self.parametres)
        manquants = [n for n in noms if n not in gradients]
        if manquants:
            raise LongueurIncoherenteError(f"gradients manquants: {manquants[:5]}")
        params = [self.parametres[n].data for n in noms]
        grads = [np.asarray(gradients[n], dtype=self.parametres[n].data.dtype) for n in noms]
        nouveaux, _ = adam_step(params, grads, self.etat, self.lr)
        for nom, valeur in zip(noms, nouveaux):
            self.parametres[nom].data = valeur
