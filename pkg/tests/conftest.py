"""
Configuration partagée pour les tests pytest

Ce module contient les fixtures partagées pour éviter la duplication
du code d'initialisation dans les tests.
"""
import json
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))
from core.corpus import generate_synthetic_corpus
from core.rng import derive_stream
from models.dataset import LabeledDataset
from models.report import VARIANTES, ExperimentReport, FidRow, RunRow

RACINE_PROJET = os.path.join(os.path.dirname(__file__), '..')


def jeu_aleatoire(n0, n1, taille=4, graine=0):
    """Jeu à deux classes de pixels uniformes, ids ``c<classe>_<i>``."""
    flux = derive_stream(graine, 0)
    n = n0 + n1
    images = flux.uniforme((n, 1, taille, taille), -1.0, 1.0)
    labels = [0] * n0 + [1] * n1
    ids = [f"c0_{i:04d}" for i in range(n0)] + [f"c1_{i:04d}" for i in range(n1)]
    return LabeledDataset(images, labels, ids, ["class_0", "class_1"])


def rapport_exemple(modeles=("custom_cnn",), runs=2):
    """Rapport complet: chaque (modèle, variante) a ``runs`` exécutions."""
    lignes = []
    for modele in modeles:
        for v, variante in enumerate(VARIANTES):
            for run in range(runs):
                base = 0.8 + 0.01 * v + 0.02 * run
                lignes.append(RunRow(modele, "small", "random", variante, run,
                                     base, base - 0.05, base + 0.05, base - 0.01))
    fid = [FidRow("ddpm", "class_1", "pixels-8x8", 1.25), FidRow("noise", "class_1", "pixels-8x8", 42.5)]
    return ExperimentReport(lignes, fid, [])


@pytest.fixture
def flux():
    """Flux aléatoire de référence."""
    return derive_stream(0, 0)


@pytest.fixture
def petit_corpus():
    """Corpus procédural de 20 images 16x16 par classe."""
    return generate_synthetic_corpus(20, 16, derive_stream(0, 0))


@pytest.fixture
def jeu_desequilibre():
    """Jeu aléatoire assez grand pour le scénario déséquilibré au facteur 0.1."""
    return jeu_aleatoire(260, 60)


@pytest.fixture
def rapport_complet():
    return rapport_exemple()


@pytest.fixture
def config_file_simple(tmp_path):
    """Crée un fichier de configuration réduit pour les tests."""
    config_data = {
        "corpus": {"n_per_class": 30, "size": 16},
        "scenario": {"kind": "small", "n_small_per_class": 10, "desk_factor": 1.0},
        "runs": 2,
        "output_dir": str(tmp_path / "sorties"),
    }
    chemin = tmp_path / "config.json"
    chemin.write_text(json.dumps(config_data, indent=2), encoding="utf-8")
    return str(chemin)


@pytest.fixture
def images_uniformes():
    """200 images 16x16 de bruit uniforme (covariance des descripteurs de rang plein)."""
    return derive_stream(3, 0).uniforme((200, 1, 16, 16), -1.0, 1.0).astype(np.float32)
