"""
Module Checkpoint - Format binaire « AGB1 » des paramètres

Disposition (petit-boutiste):
    magie b"AGB1" | version u32 | nombre d'entrées u32 |
    pour chaque entrée: longueur du nom u32, nom utf-8, ndim u32, dims u32 × ndim,
    données f32 × produit(dims)
"""

import struct

import numpy as np

from exceptions import CheckpointInvalideError

MAGIE = b"AGB1"
VERSION = 1


def _paires(entries):
    return list(entries.items()) if hasattr(entries, "items") else list(entries)


def save_checkpoint(entries, path):
    """
    Écrit des tenseurs nommés.

    Args:
        entries (dict | list): Nom -> tableau, ou paires (nom, tableau)
        path (str): Fichier de sortie

    Raises:
        CheckpointInvalideError: Si un nom est dupliqué
    """
    paires = _paires(entries)
    noms = [nom for nom, _ in paires]
    if len(set(noms)) != len(noms):
        doublons = sorted({n for n in noms if noms.count(n) > 1})
        raise CheckpointInvalideError(f"noms dupliqués: {doublons}")
    morceaux = [MAGIE, struct.pack("<II", VERSION, len(paires))]
    for nom, valeur in paires:
        tableau = np.asarray(valeur, dtype="<f4")
        nom_octets = nom.encode("utf-8")
        morceaux.append(struct.pack("<I", len(nom_octets)))
        morceaux.append(nom_octets)
        morceaux.append(struct.pack(f"<I{tableau.ndim}I", tableau.ndim, *tableau.shape))
        morceaux.append(tableau.tobytes())
    with open(path, "wb") as f:
        f.write(b"".join(morceaux))


class _Lecteur:
    def __init__(self, contenu, path):
        self.contenu = contenu
        self.position = 0
        self.path = path

    def lire(self, n):
        if self.position + n > len(self.contenu):
            raise CheckpointInvalideError(f"{self.path}: fichier tronqué")
        morceau = self.contenu[self.position:self.position + n]
        self.position += n
        return morceau

    def u32(self, n=1):
        return struct.unpack(f"<{n}I", self.lire(4 * n))


def load_checkpoint(path):
    """
    Lit un fichier AGB1.

    Returns:
        dict: Nom -> tableau float32, dans l'ordre du fichier

    Raises:
        CheckpointInvalideError: Magie ou version inconnue, fichier tronqué, noms dupliqués
            ou non UTF-8
    """
    with open(path, "rb") as f:
        lecteur = _Lecteur(f.read(), path)
    if lecteur.lire(4) != MAGIE:
        raise CheckpointInvalideError(f"{path}: magie invalide")
    version, nombre = lecteur.u32(2)
    if version != VERSION:
        raise CheckpointInvalideError(f"{path}: version {version} non supportée")
    entrees = {}
    for _ in range(nombre):
        (longueur,) = lecteur.u32()
        try:
            nom = lecteur.lire(longueur).decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointInvalideError(f"{path}: nom d'entrée non UTF-8 ({e})") from e
        if nom in entrees:
            raise CheckpointInvalideError(f"{path}: nom dupliqué '{nom}'")
        (ndim,) = lecteur.u32()
        dims = lecteur.u32(ndim) if ndim else ()
        taille = int(np.prod(dims, dtype=np.int64))
        donnees = np.frombuffer(lecteur.lire(4 * taille), dtype="<f4")
        entrees[nom] = donnees.reshape(dims).astype(np.float32)
    if lecteur.position != len(lecteur.contenu):
        raise CheckpointInvalideError(f"{path}: octets en trop après la dernière entrée")
    return entrees
