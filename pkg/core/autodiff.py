"""
Module Autodiff - Tenseurs et différentiation automatique en mode inverse

Ce module fournit le substrat numérique de tous les réseaux du banc:
un ``Tensor`` (tableau numpy + gradient), un ensemble fermé de primitives
différentiables, un ``Graph`` qui enregistre les noeuds dans leur ordre de
création, et la rétropropagation.

L'entraînement se fait en float32; le mode float64 (``precision_f64``) sert
uniquement aux vérifications par différences finies.
"""

import threading
from contextlib import contextmanager

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from exceptions import (
    EntreeNonLieeError,
    FormeInvalideError,
    RetropropagationError,
    ValeurNonFinieError,
)

PENTE_LEAKY = 0.2

_etat = threading.local()


def _pile_graphes():
    if not hasattr(_etat, "graphes"):
        _etat.graphes = []
    return _etat.graphes


def dtype_courant():
    """Type flottant actif: float32 par défaut, float64 dans ``precision_f64``."""
    return getattr(_etat, "dtype", np.float32)


def gradient_actif():
    return not getattr(_etat, "sans_gradient", False)


@contextmanager
def precision_f64():
    """Bascule temporairement tous les calculs en float64."""
    precedent = dtype_courant()
    _etat.dtype = np.float64
    try:
        yield
    finally:
        _etat.dtype = precedent


@contextmanager
def no_grad():
    """Désactive l'enregistrement des dépendances (évaluation, échantillonnage)."""
    precedent = getattr(_etat, "sans_gradient", False)
    _etat.sans_gradient = True
    try:
        yield
    finally:
        _etat.sans_gradient = precedent


def _tableau(valeur):
    return np.asarray(valeur, dtype=dtype_courant())


class Tensor:
    """
    Valeur n-dimensionnelle avec emplacement de gradient optionnel.

    Attributes:
        data (np.ndarray): Valeurs (float32, ou float64 en mode vérification)
        requires_grad (bool): Vrai pour les paramètres et les noeuds qui en dépendent
        grad (np.ndarray | None): Gradient rempli par ``backward``
        nom (str | None): Nom lisible (paramètres)

    Example:
        >>> x = Tensor([3.0], requires_grad=True)
        >>> y = mul(x, x)
        >>> y.backward()
        >>> x.grad
        array([6.], dtype=float32)
    """

    __slots__ = ("data", "requires_grad", "grad", "nom", "op", "_parents", "_retour")

    def __init__(self, data, requires_grad=False, nom=None):
        self.data = _tableau(data)
        self.requires_grad = bool(requires_grad)
        self.grad = None
        self.nom = nom
        self.op = None
        self._parents = ()
        self._retour = None

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    def __repr__(self):
        etiquette = f", op={self.op}" if self.op else ""
        return f"Tensor(shape={self.shape}{etiquette})"

    def item(self):
        return float(self.data.reshape(-1)[0])

    def numpy(self):
        return self.data

    def detach(self):
        return Tensor(self.data)

    def backward(self):
        """Rétropropage depuis ce tenseur scalaire et remplit ``grad`` des feuilles."""
        if self.data.size != 1:
            raise RetropropagationError(f"perte non scalaire de forme {self.shape}")
        ordre, vus = [], set()

        def visiter(noeud):
            if id(noeud) in vus:
                return
            vus.add(id(noeud))
            for parent in noeud._parents:
                visiter(parent)
            ordre.append(noeud)

        visiter(self)
        gradients = _propager(ordre, self)
        for noeud in ordre:
            if noeud.requires_grad and not noeud._parents and id(noeud) in gradients:
                g = gradients[id(noeud)]
                noeud.grad = g if noeud.grad is None else noeud.grad + g

    # Opérateurs usuels
    def __add__(self, autre):
        return add(self, _en_tenseur(autre))

    def __radd__(self, autre):
        return add(_en_tenseur(autre), self)

    def __sub__(self, autre):
        return sub(self, _en_tenseur(autre))

    def __mul__(self, autre):
        if np.isscalar(autre):
            return mul_scalar(self, autre)
        return mul(self, _en_tenseur(autre))

    def __rmul__(self, autre):
        return self.__mul__(autre)

    def __neg__(self):
        return mul_scalar(self, -1.0)


def _en_tenseur(valeur):
    return valeur if isinstance(valeur, Tensor) else Tensor(valeur)


class Graph:
    """
    Graphe de calcul enregistré dans l'ordre de création des noeuds.

    Un graphe se construit soit à partir d'une fonction et de ses entrées
    déclarées (``evaluate_graph``), soit en enregistrant une passe avant
    dans le contexte ``enregistrer()``.

    Attributes:
        fonction (callable | None): Fonction ``(**entrees) -> Tensor | dict``
        entrees (dict): Nom -> forme attendue (``None`` pour une dimension libre)
        parametres (dict): Nom -> Tensor dont on veut les gradients
        verifie (bool): Mode vérifié: toute sortie non finie est une erreur
        noeuds (list): Noeuds dans l'ordre topologique de création

    Example:
        >>> graphe = Graph(parametres=modele.parametres_entrainables())
        >>> with graphe.enregistrer():
        ...     perte = mse(modele(x), cible)
        >>> gradients = backpropagate(graphe, perte)
    """

    def __init__(self, fonction=None, entrees=None, parametres=None, verifie=False):
        self.fonction = fonction
        self.entrees = dict(entrees or {})
        self.parametres = dict(parametres or {})
        self.verifie = verifie
        self.noeuds = []
        self.evalue = False

    @contextmanager
    def enregistrer(self):
        """Enregistre tous les noeuds créés dans ce contexte."""
        self.noeuds = []
        self.evalue = False
        pile = _pile_graphes()
        pile.append(self)
        try:
            yield self
        finally:
            pile.pop()
        self.evalue = True


def _noeud(valeur, parents, retour, op):
    """Crée le tenseur résultat d'une primitive et l'enregistre si nécessaire."""
    sortie = Tensor(valeur)
    if gradient_actif() and any(p.requires_grad for p in parents):
        sortie.requires_grad = True
        sortie.op = op
        sortie._parents = tuple(parents)
        sortie._retour = retour
        pile = _pile_graphes()
        if pile:
            pile[-1].noeuds.append(sortie)
    return sortie


def _reduire_diffusion(g, forme):
    """Somme un gradient diffusé (broadcast) pour retrouver ``forme``."""
    while g.ndim > len(forme):
        g = g.sum(axis=0)
    for axe, taille in enumerate(forme):
        if taille == 1 and g.shape[axe] != 1:
            g = g.sum(axis=axe, keepdims=True)
    return g


# ----------------------------------------------------------------------
# Primitives élémentaires
# ----------------------------------------------------------------------
def _forme_diffusee(a, b, op):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError as exc:
        raise FormeInvalideError(f"{op}: formes {a.shape} et {b.shape} incompatibles") from exc


def add(a, b):
    _forme_diffusee(a, b, "add")
    return _noeud(
        a.data + b.data, (a, b),
        lambda g: (_reduire_diffusion(g, a.shape), _reduire_diffusion(g, b.shape)),
        "add",
    )


def sub(a, b):
    _forme_diffusee(a, b, "sub")
    return _noeud(
        a.data - b.data, (a, b),
        lambda g: (_reduire_diffusion(g, a.shape), -_reduire_diffusion(g, b.shape)),
        "sub",
    )


def mul(a, b):
    _forme_diffusee(a, b, "mul")
    return _noeud(
        a.data * b.data, (a, b),
        lambda g: (_reduire_diffusion(g * b.data, a.shape), _reduire_diffusion(g * a.data, b.shape)),
        "mul",
    )


def mul_scalar(a, s):
    s = float(s)
    return _noeud(a.data * s, (a,), lambda g: (g * s,), "mul_scalar")


def matmul(a, b):
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise FormeInvalideError(f"matmul: formes {a.shape} et {b.shape} incompatibles")
    return _noeud(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g), "matmul")


def linear(x, poids, biais=None):
    """
    Couche affine ``x @ W + b`` sur le dernier axe.

    Args:
        x (Tensor): Entrée de forme (..., entree)
        poids (Tensor): Poids de forme (entree, sortie)
        biais (Tensor, optional): Biais de forme (sortie,)

    Returns:
        Tensor: Sortie de forme (..., sortie)
    """
    if poids.ndim != 2 or x.shape[-1] != poids.shape[0]:
        raise FormeInvalideError(f"linear: entrée {x.shape} incompatible avec poids {poids.shape}")
    if biais is not None and biais.shape != (poids.shape[1],):
        raise FormeInvalideError(f"linear: biais {biais.shape} pour {poids.shape[1]} sorties")
    x2 = x.data.reshape(-1, poids.shape[0])
    y = x2 @ poids.data
    if biais is not None:
        y = y + biais.data
    forme_sortie = x.shape[:-1] + (poids.shape[1],)

    def retour(g):
        g2 = g.reshape(-1, poids.shape[1])
        gx = (g2 @ poids.data.T).reshape(x.shape)
        gw = x2.T @ g2
        if biais is None:
            return gx, gw
        return gx, gw, g2.sum(axis=0)

    parents = (x, poids) if biais is None else (x, poids, biais)
    return _noeud(y.reshape(forme_sortie), parents, retour, "linear")


def conv2d(x, poids, biais=None, padding=0):
    """
    Convolution 2D de pas 1 au format NCHW (corrélation croisée).

    Args:
        x (Tensor): Entrée (N, C, H, W)
        poids (Tensor): Noyaux (O, C, kh, kw)
        biais (Tensor, optional): Biais (O,)
        padding (int): Bourrage de zéros sur chaque bord

    Returns:
        Tensor: Sortie (N, O, H + 2p - kh + 1, W + 2p - kw + 1)

    Example:
        >>> conv2d(Tensor(np.ones((1, 1, 3, 3))), Tensor(np.ones((1, 1, 3, 3)))).data
        array([[[[9.]]]], dtype=float32)
    """
    if x.ndim != 4 or poids.ndim != 4 or x.shape[1] != poids.shape[1]:
        raise FormeInvalideError(f"conv2d: entrée {x.shape} incompatible avec noyaux {poids.shape}")
    _, _, kh, kw = poids.shape
    p = int(padding)
    hauteur, largeur = x.shape[2] + 2 * p, x.shape[3] + 2 * p
    if hauteur < kh or largeur < kw:
        raise FormeInvalideError(f"conv2d: noyau {kh}x{kw} plus grand que l'entrée {x.shape}")
    xp = np.pad(x.data, ((0, 0), (0, 0), (p, p), (p, p))) if p else x.data
    fenetres = sliding_window_view(xp, (kh, kw), axis=(2, 3))
    y = np.tensordot(fenetres, poids.data, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    if biais is not None:
        y = y + biais.data.reshape(1, -1, 1, 1)
    ho, wo = y.shape[2], y.shape[3]

    def retour(g):
        gw = np.tensordot(g, fenetres, axes=([0, 2, 3], [0, 2, 3]))
        gxp = np.zeros(xp.shape, dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                contribution = np.tensordot(g, poids.data[:, :, i, j], axes=([1], [0]))
                gxp[:, :, i:i + ho, j:j + wo] += contribution.transpose(0, 3, 1, 2)
        gx = gxp[:, :, p:p + x.shape[2], p:p + x.shape[3]] if p else gxp
        if biais is None:
            return gx, gw
        return gx, gw, g.sum(axis=(0, 2, 3))

    parents = (x, poids) if biais is None else (x, poids, biais)
    return _noeud(np.ascontiguousarray(y), parents, retour, "conv2d")


def upsample_nearest2x(x):
    """Suréchantillonnage au plus proche voisin d'un facteur 2 (NCHW)."""
    if x.ndim != 4:
        raise FormeInvalideError(f"upsample: entrée 4D attendue, reçu {x.shape}")
    y = np.repeat(np.repeat(x.data, 2, axis=2), 2, axis=3)
    n, c, h, w = x.shape
    return _noeud(
        y, (x,), lambda g: (g.reshape(n, c, h, 2, w, 2).sum(axis=(3, 5)),), "upsample_nearest2x"
    )


def _verifier_pool(x, op):
    if x.ndim != 4 or x.shape[2] % 2 or x.shape[3] % 2:
        raise FormeInvalideError(f"{op}: entrée 4D de côtés pairs attendue, reçu {x.shape}")


def avg_pool2(x):
    _verifier_pool(x, "avg_pool2")
    n, c, h, w = x.shape
    y = x.data.reshape(n, c, h // 2, 2, w // 2, 2).mean(axis=(3, 5))

    def retour(g):
        return (np.repeat(np.repeat(g, 2, axis=2), 2, axis=3) * 0.25,)

    return _noeud(y, (x,), retour, "avg_pool2")


def max_pool2(x):
    _verifier_pool(x, "max_pool2")
    n, c, h, w = x.shape
    blocs = x.data.reshape(n, c, h // 2, 2, w // 2, 2).transpose(0, 1, 2, 4, 3, 5)
    blocs = blocs.reshape(n, c, h // 2, w // 2, 4)
    indices = blocs.argmax(axis=-1)[..., None]
    y = np.take_along_axis(blocs, indices, axis=-1)[..., 0]

    def retour(g):
        masque = np.zeros(blocs.shape, dtype=g.dtype)
        np.put_along_axis(masque, indices, g[..., None], axis=-1)
        masque = masque.reshape(n, c, h // 2, w // 2, 2, 2).transpose(0, 1, 2, 4, 3, 5)
        return (masque.reshape(n, c, h, w),)

    return _noeud(y, (x,), retour, "max_pool2")


def batch_norm(x, gamma, beta, moyenne, variance, eps=1e-3):
    """
    Normalisation par lot avec statistiques fournies.

    En entraînement, ``moyenne`` et ``variance`` sont ``None``: les statistiques
    du lot sont utilisées (et retournées pour la mise à jour des moyennes mobiles).
    En évaluation, on passe les statistiques mobiles.

    Args:
        x (Tensor): Entrée (N, F) ou (N, C, H, W)
        gamma (Tensor): Échelle (F,) ou (C,)
        beta (Tensor): Décalage
        moyenne (np.ndarray | None): Moyenne fixe
        variance (np.ndarray | None): Variance fixe
        eps (float): Stabilisateur

    Returns:
        tuple: (Tensor normalisé, moyenne du lot, variance du lot)
    """
    if x.ndim not in (2, 4) or gamma.shape != (x.shape[1],) or beta.shape != gamma.shape:
        raise FormeInvalideError(f"batch_norm: entrée {x.shape}, gamma {gamma.shape}")
    axes = (0,) if x.ndim == 2 else (0, 2, 3)
    forme = (1, -1) if x.ndim == 2 else (1, -1, 1, 1)
    mode_lot = moyenne is None
    if mode_lot:
        moyenne = x.data.mean(axis=axes)
        variance = x.data.var(axis=axes)
    inv_ecart = 1.0 / np.sqrt(variance + eps)
    x_norm = (x.data - moyenne.reshape(forme)) * inv_ecart.reshape(forme)
    y = gamma.data.reshape(forme) * x_norm + beta.data.reshape(forme)
    m = x.data.size / x.shape[1]

    def retour(g):
        g_norm = g * gamma.data.reshape(forme)
        if mode_lot:
            somme = g_norm.sum(axis=axes, keepdims=True)
            somme_xn = (g_norm * x_norm).sum(axis=axes, keepdims=True)
            gx = inv_ecart.reshape(forme) / m * (m * g_norm - somme - x_norm * somme_xn)
        else:
            gx = g_norm * inv_ecart.reshape(forme)
        return gx, (g * x_norm).sum(axis=axes), g.sum(axis=axes)

    return _noeud(y, (x, gamma, beta), retour, "batch_norm"), moyenne, variance


# ----------------------------------------------------------------------
# Activations
# ----------------------------------------------------------------------
def relu(x):
    masque = x.data > 0
    return _noeud(x.data * masque, (x,), lambda g: (g * masque,), "relu")


def leaky_relu(x, pente=PENTE_LEAKY):
    facteur = np.where(x.data > 0, 1.0, pente).astype(x.data.dtype)
    return _noeud(x.data * facteur, (x,), lambda g: (g * facteur,), "leaky_relu")


def _sigmoide(v):
    return 0.5 * (1.0 + np.tanh(0.5 * v))


def sigmoid(x):
    s = _sigmoide(x.data)
    return _noeud(s, (x,), lambda g: (g * s * (1.0 - s),), "sigmoid")


def silu(x):
    s = _sigmoide(x.data)
    return _noeud(x.data * s, (x,), lambda g: (g * (s + x.data * s * (1.0 - s)),), "silu")


def tanh(x):
    t = np.tanh(x.data)
    return _noeud(t, (x,), lambda g: (g * (1.0 - t * t),), "tanh")


def log(x):
    return _noeud(np.log(x.data), (x,), lambda g: (g / x.data,), "log")


def log_sigmoid(x):
    """log(sigmoid(x)) stable numériquement."""
    y = -np.logaddexp(0.0, -x.data)
    return _noeud(y, (x,), lambda g: (g * _sigmoide(-x.data),), "log_sigmoid")


# ----------------------------------------------------------------------
# Formes
# ----------------------------------------------------------------------
def reshape(x, forme):
    forme = tuple(forme)
    try:
        y = x.data.reshape(forme)
    except ValueError as exc:
        raise FormeInvalideError(f"reshape: {x.shape} vers {forme}") from exc
    return _noeud(y, (x,), lambda g: (g.reshape(x.shape),), "reshape")


def flatten(x):
    return reshape(x, (x.shape[0], -1))


def concat_channels(a, b):
    """Concatène deux tenseurs sur l'axe 1 (canaux, ou caractéristiques en 2D)."""
    if a.ndim != b.ndim or a.shape[:1] + a.shape[2:] != b.shape[:1] + b.shape[2:]:
        raise FormeInvalideError(f"concat: formes {a.shape} et {b.shape} incompatibles")
    ca = a.shape[1]
    return _noeud(
        np.concatenate([a.data, b.data], axis=1), (a, b),
        lambda g: (g[:, :ca], g[:, ca:]),
        "concat_channels",
    )


# ----------------------------------------------------------------------
# Réductions et pertes
# ----------------------------------------------------------------------
def sum(x):  # pylint: disable=redefined-builtin
    return _noeud(np.sum(x.data), (x,), lambda g: (np.broadcast_to(g, x.shape).copy(),), "sum")


def mean(x):
    n = x.data.size
    return _noeud(np.mean(x.data), (x,), lambda g: (np.full(x.shape, g / n, dtype=x.data.dtype),), "mean")


def mse(prediction, cible):
    """Erreur quadratique moyenne sur tous les éléments."""
    if prediction.shape != cible.shape:
        raise FormeInvalideError(f"mse: formes {prediction.shape} et {cible.shape} différentes")
    ecart = prediction.data - cible.data
    n = ecart.size

    def retour(g):
        d = 2.0 * g * ecart / n
        return d, -d

    return _noeud(np.mean(ecart * ecart), (prediction, cible), retour, "mse")


def softmax_cross_entropy(logits, etiquettes):
    """
    Entropie croisée moyenne entre logits (N, K) et étiquettes entières (N,).

    Args:
        logits (Tensor): Scores non normalisés
        etiquettes (np.ndarray): Indices de classe

    Returns:
        Tensor: Perte scalaire
    """
    etiquettes = np.asarray(etiquettes, dtype=np.int64)
    if logits.ndim != 2 or etiquettes.shape != (logits.shape[0],):
        raise FormeInvalideError(f"cross-entropy: logits {logits.shape}, étiquettes {etiquettes.shape}")
    if etiquettes.size and (etiquettes.min() < 0 or etiquettes.max() >= logits.shape[1]):
        raise FormeInvalideError("cross-entropy: étiquette hors des classes")
    z = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=1))
    lignes = np.arange(len(etiquettes))
    perte = np.mean(lse - z[lignes, etiquettes])
    probas = np.exp(z - lse[:, None])

    def retour(g):
        d = probas.copy()
        d[lignes, etiquettes] -= 1.0
        return (d * (g / len(etiquettes)),)

    return _noeud(perte, (logits,), retour, "softmax_cross_entropy")


def dropout(x, taux, rng):
    """Dropout inversé: masque de Bernoulli tiré de ``rng``, échelle 1/(1-taux)."""
    if taux <= 0.0:
        return x
    masque = (rng.uniforme(x.shape) >= taux).astype(x.data.dtype) / (1.0 - taux)
    return _noeud(x.data * masque, (x,), lambda g: (g * masque,), "dropout")


# ----------------------------------------------------------------------
# Évaluation et rétropropagation
# ----------------------------------------------------------------------
def _verifier_fini(nom, tenseur):
    if not np.all(np.isfinite(tenseur.data)):
        raise ValeurNonFinieError(f"valeur non finie dans la sortie '{nom}'")


def evaluate_graph(graph, inputs):
    """
    Évalue un graphe déclaré sur des entrées nommées.

    Args:
        graph (Graph): Graphe avec ``fonction`` et ``entrees`` déclarées
        inputs (dict): Nom -> Tensor

    Returns:
        dict: Nom -> Tensor de sortie (``"sortie"`` si la fonction rend un seul tenseur)

    Raises:
        EntreeNonLieeError: Si une entrée déclarée manque
        FormeInvalideError: Si une forme ne correspond pas à la déclaration
        ValeurNonFinieError: En mode vérifié, si une sortie n'est pas finie

    Example:
        >>> g = Graph(lambda x: relu(x), entrees={"x": (3,)})
        >>> evaluate_graph(g, {"x": Tensor([-1, 0, 2])})["sortie"].data
        array([0., 0., 2.], dtype=float32)
    """
    for nom, forme in graph.entrees.items():
        if nom not in inputs:
            raise EntreeNonLieeError(f"entrée '{nom}' non liée")
        recue = inputs[nom].shape
        if forme is not None and (
            len(forme) != len(recue) or any(d is not None and d != r for d, r in zip(forme, recue))
        ):
            raise FormeInvalideError(f"entrée '{nom}': forme {recue}, attendu {tuple(forme)}")
    with graph.enregistrer():
        sorties = graph.fonction(**inputs)
    if isinstance(sorties, Tensor):
        sorties = {"sortie": sorties}
    if graph.verifie:
        for nom, tenseur in sorties.items():
            _verifier_fini(nom, tenseur)
    return dict(sorties)


def _propager(noeuds, perte):
    """Parcourt ``noeuds`` (ordre topologique) à l'envers et accumule les gradients."""
    gradients = {id(perte): np.ones(perte.shape, dtype=perte.data.dtype)}
    for noeud in reversed(noeuds):
        if noeud._retour is None:
            continue
        # les noeuds intermédiaires n'ont plus besoin de leur gradient une fois propagé
        g = gradients.pop(id(noeud), None)
        if g is None:
            continue
        for parent, gp in zip(noeud._parents, noeud._retour(g)):
            if gp is None or not parent.requires_grad:
                continue
            cle = id(parent)
            gradients[cle] = gradients[cle] + gp if cle in gradients else gp
    return gradients


def _gradients_graphe(graph, loss_node):
    if not graph.evalue:
        raise RetropropagationError("rétropropagation appelée avant l'évaluation du graphe")
    if loss_node.data.size != 1:
        raise RetropropagationError(f"perte non scalaire de forme {loss_node.shape}")
    return _propager(graph.noeuds, loss_node)


def backpropagate(graph, loss_node):
    """
    Rétropropage la perte scalaire à travers le graphe enregistré.

    Args:
        graph (Graph): Graphe déjà évalué
        loss_node (Tensor): Perte scalaire

    Returns:
        dict: Nom de paramètre -> gradient (zéros pour les paramètres non utilisés)

    Raises:
        RetropropagationError: Avant l'évaluation ou si la perte n'est pas scalaire
    """
    gradients = _gradients_graphe(graph, loss_node)
    return {
        nom: gradients.get(id(p), np.zeros(p.shape, dtype=p.data.dtype)).reshape(p.shape)
        for nom, p in graph.parametres.items()
    }


def input_gradients(graph, loss_node, tenseurs):
    """Gradients de la perte par rapport à des tenseurs d'entrée (``requires_grad=True``)."""
    gradients = _gradients_graphe(graph, loss_node)
    return [gradients.get(id(t), np.zeros(t.shape, dtype=t.data.dtype)).reshape(t.shape) for t in tenseurs]
