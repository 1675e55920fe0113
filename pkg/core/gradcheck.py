"""
Module Gradcheck - Vérification des gradients par différences finies centrées

Les vérifications se font en float64: en float32 les différences finies
sont trop bruitées.
"""

import numpy as np

from core.autodiff import Graph, backpropagate, no_grad, precision_f64


def erreur_relative(analytique, numerique):
    """‖a − n‖ / (‖a‖ + ‖n‖), nulle quand les deux gradients sont nuls."""
    a = np.ravel(analytique)
    n = np.ravel(numerique)
    denominateur = np.linalg.norm(a) + np.linalg.norm(n)
    if denominateur == 0.0:
        return 0.0
    return float(np.linalg.norm(a - n) / denominateur)


def check_gradients(fonction, tenseurs, eps=1e-6, indices_max=None, rng=None):
    """
    Compare le gradient analytique de ``fonction`` à des différences finies centrées.

    Les tenseurs sont convertis en float64 le temps de la vérification puis
    restaurés.

    Args:
        fonction (callable): ``fonction(*tenseurs) -> Tensor`` scalaire
        tenseurs (list): Tenseurs (``requires_grad=True``) à vérifier
        eps (float): Pas des différences finies
        indices_max (int, optional): Nombre maximal d'éléments testés par tenseur
        rng (RngStream, optional): Tirage des éléments testés quand ``indices_max`` est fixé

    Returns:
        float: Plus grande erreur relative parmi les tenseurs
    """
    originaux = [t.data for t in tenseurs]
    erreurs = []
    try:
        with precision_f64():
            for t in tenseurs:
                t.data = t.data.astype(np.float64)
            graphe = Graph(parametres={f"t{i}": t for i, t in enumerate(tenseurs)})
            with graphe.enregistrer():
                sortie = fonction(*tenseurs)
            analytiques = backpropagate(graphe, sortie)

            with no_grad():
                for i, t in enumerate(tenseurs):
                    elements = np.arange(t.data.size)
                    if indices_max is not None and t.data.size > indices_max:
                        elements = np.sort(rng.permutation(t.data.size)[:indices_max])
                    a = analytiques[f"t{i}"].reshape(-1)[elements]
                    n = np.empty(len(elements))
                    plat = t.data.reshape(-1)
                    for k, e in enumerate(elements):
                        sauvegarde = plat[e]
                        plat[e] = sauvegarde + eps
                        f_plus = fonction(*tenseurs).item()
                        plat[e] = sauvegarde - eps
                        f_moins = fonction(*tenseurs).item()
                        plat[e] = sauvegarde
                        n[k] = (f_plus - f_moins) / (2.0 * eps)
                    erreurs.append(erreur_relative(a, n))
    finally:
        for t, donnees in zip(tenseurs, originaux):
            t.data = donnees
    return max(erreurs) if erreurs else 0.0
