"""
Banc d'augmentation d'images

Un package Python pour évaluer l'augmentation de données d'images par modèles
génératifs: DDPM et GAN progressif entraînés par classe, scores FID, contrôle
par un classifieur expert, sélection aléatoire ou Greedy-K des jeux
d'entraînement, et classifieurs (CNN personnalisé, VGG16) entraînés sur les
jeux réels et mixtes.

Sous-modules:
- models: Jeux étiquetés et rapport d'expérience
- core: Différentiation automatique, générateurs, sélection, métriques, pipeline
- io_utils: Formats PGM et AGB1, affichage console, export des rapports
- tests: Tests unitaires
- data: Fichiers de configuration

Exemple d'utilisation:
    >>> from core.config import load_config
    >>> from core.pipeline import run_experiment
    >>> rapport = run_experiment(load_config("data/config_smoke.json"))

Auteur: Aya Zid
Version: 0.1.0
Licence: MIT
"""

__version__ = "0.1.0"
__author__ = "Aya Zid"
__email__ = "azid28278@gmail.com"
__license__ = "MIT"

# Import des classes principales pour faciliter l'accès
from models.dataset import LabeledDataset
from models.report import ExperimentReport
from core.config import ExperimentConfig, load_config, parse_config
from core.pipeline import Pipeline, run_experiment
from io_utils.affichage import Affichage
from io_utils.export import Export

__all__ = [
    "LabeledDataset",
    "ExperimentReport",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "Pipeline",
    "run_experiment",
    "Affichage",
    "Export"
]
