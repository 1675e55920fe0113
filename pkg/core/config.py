"""
Module Config - Configuration JSON des expériences

``parse_config`` construit un ``ExperimentConfig`` à partir d'un texte JSON:
les clés absentes prennent leur valeur par défaut, les clés inconnues, les
types incorrects et les contraintes violées sont rejetés avec le chemin
pointé de la clé fautive (``ddpm.timesteps``, ``runs``...).
"""

import dataclasses
import json
import logging
import math
from dataclasses import dataclass, field

from core.classify import MODELES, TrainProtocol
from core.diffusion import DdpmConfig
from core.metrics import EXTRACTEURS
from core.pggan import GanConfig
from core.selection import ScenarioSpec
from exceptions import BancError, ConfigurationInvalideError

logger = logging.getLogger(__name__)

SOURCES_CORPUS = ("generated", "directory")


@dataclass(frozen=True)
class CorpusConfig:
    """
    Source du corpus réel.

    Attributes:
        source (str): ``"generated"`` (corpus procédural) ou ``"directory"`` (PGM)
        n_per_class (int): Images par classe générées
        size (int): Côté des images générées
        seed (int): Graine du corpus procédural
        path (str | None): Répertoire PGM (source ``directory``)
    """

    source: str = "generated"
    n_per_class: int = 600
    size: int = 32
    seed: int = 0
    path: str = None

    def __post_init__(self):
        if self.source not in SOURCES_CORPUS:
            raise ValueError(f"source inconnue: {self.source}")
        if self.source == "directory" and not self.path:
            raise ValueError("path requis pour la source 'directory'")
        if self.n_per_class < 1:
            raise ValueError("n_per_class doit être ≥ 1")
        if self.size < 16 or self.size & (self.size - 1):
            raise ValueError(f"size doit être une puissance de deux ≥ 16, reçu {self.size}")


@dataclass(frozen=True)
class ClassifierConfig:
    """
    Classifieurs évalués et classifieur expert.

    ``input_size`` est la taille d'entrée des réseaux (les images du corpus y
    sont ramenées); VGG16 exige un multiple de 32.
    """

    models: tuple = ("custom_cnn", "vgg16")
    custom_cnn_epochs: int = 20
    vgg16_epochs: int = 10
    batch_size: int = 32
    lr: float = 1e-4
    expert_model: str = "custom_cnn"
    expert_epochs: int = 10
    input_size: int = 32
    backbone_checkpoint: str = None

    def __post_init__(self):
        inconnus = [m for m in self.models if m not in MODELES]
        if not self.models or inconnus:
            raise ValueError(f"modèles inconnus ou liste vide: {inconnus}")
        if self.expert_model not in MODELES:
            raise ValueError(f"expert_model inconnu: {self.expert_model}")
        for nom in ("custom_cnn_epochs", "vgg16_epochs", "batch_size", "expert_epochs"):
            if getattr(self, nom) < 1:
                raise ValueError(f"{nom} doit être ≥ 1")
        if self.lr <= 0:
            raise ValueError("lr doit être > 0")
        if self.input_size % 8:
            raise ValueError(f"input_size doit être un multiple de 8, reçu {self.input_size}")
        if "vgg16" in self.models and self.input_size % 32:
            raise ValueError(f"input_size doit être un multiple de 32 pour vgg16, reçu {self.input_size}")

    def epochs(self, modele):
        return self.custom_cnn_epochs if modele == "custom_cnn" else self.vgg16_epochs

    def protocol(self, runs):
        return TrainProtocol(
            epochs={"custom_cnn": self.custom_cnn_epochs, "vgg16": self.vgg16_epochs},
            batch_size=self.batch_size,
            lr=self.lr,
            runs=runs,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Configuration complète d'une expérience.

    Example:
        >>> cfg = parse_config("{}")
        >>> cfg.runs, cfg.scenario.desk_factor
        (5, 0.2)
    """

    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    scenario: ScenarioSpec = field(default_factory=lambda: ScenarioSpec(desk_factor=0.2))
    ddpm: DdpmConfig = field(default_factory=DdpmConfig)
    pggan: GanConfig = field(default_factory=GanConfig)
    synth_per_class: int = 400
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    fid_extractors: tuple = ("pixels-8x8",)
    runs: int = 5
    master_seed: int = 0
    output_dir: str = "sorties"

    def __post_init__(self):
        if self.runs < 2:
            raise ConfigurationInvalideError("runs", f"doit être ≥ 2, reçu {self.runs}")
        if self.synth_per_class < 2:
            raise ConfigurationInvalideError("synth_per_class", f"doit être ≥ 2, reçu {self.synth_per_class}")
        if self.master_seed < 0:
            raise ConfigurationInvalideError("master_seed", "doit être ≥ 0")
        inconnus = [e for e in self.fid_extractors if e not in EXTRACTEURS]
        if not self.fid_extractors or inconnus:
            raise ConfigurationInvalideError("fid_extractors", f"extracteurs inconnus ou liste vide: {inconnus}")


# Valeurs par défaut propres à l'expérience, différentes de celles des classes
DEFAUTS_SECTIONS = {"scenario": {"desk_factor": 0.2}}

SECTIONS = {
    "corpus": CorpusConfig,
    "scenario": ScenarioSpec,
    "ddpm": DdpmConfig,
    "pggan": GanConfig,
    "classifier": ClassifierConfig,
}


def _verifier_type(valeur, attendu, defaut, chemin):
    if defaut is None and valeur is None:
        return None
    if attendu is bool:
        if not isinstance(valeur, bool):
            raise ConfigurationInvalideError(chemin, f"booléen attendu, reçu {valeur!r}")
        return valeur
    if attendu is int:
        if isinstance(valeur, bool) or not isinstance(valeur, int):
            raise ConfigurationInvalideError(chemin, f"entier attendu, reçu {valeur!r}")
        return valeur
    if attendu is float:
        if isinstance(valeur, bool) or not isinstance(valeur, (int, float)):
            raise ConfigurationInvalideError(chemin, f"nombre attendu, reçu {valeur!r}")
        if not math.isfinite(valeur):
            raise ConfigurationInvalideError(chemin, f"nombre fini attendu, reçu {valeur!r}")
        return float(valeur)
    if attendu is str:
        if not isinstance(valeur, str):
            raise ConfigurationInvalideError(chemin, f"chaîne attendue, reçu {valeur!r}")
        return valeur
    if attendu is tuple:
        if not isinstance(valeur, list) or not all(isinstance(v, str) for v in valeur):
            raise ConfigurationInvalideError(chemin, f"liste de chaînes attendue, reçu {valeur!r}")
        return tuple(valeur)
    if attendu is dict:
        if not isinstance(valeur, dict):
            raise ConfigurationInvalideError(chemin, f"objet attendu, reçu {valeur!r}")
        try:
            return {int(k): int(v) for k, v in valeur.items()}
        except (TypeError, ValueError) as e:
            raise ConfigurationInvalideError(chemin, f"résolution -> filtres entiers attendus ({e})") from e
    raise ConfigurationInvalideError(chemin, f"type non géré {attendu}")


def _construire(classe, valeurs, prefixe, defauts=None):
    if not isinstance(valeurs, dict):
        raise ConfigurationInvalideError(prefixe, f"objet attendu, reçu {type(valeurs).__name__}")
    champs = {f.name: f for f in dataclasses.fields(classe)}
    inconnues = sorted(set(valeurs) - set(champs))
    if inconnues:
        raise ConfigurationInvalideError(f"{prefixe}.{inconnues[0]}" if prefixe else inconnues[0], "clé inconnue")
    arguments = dict(defauts or {})
    for nom, valeur in valeurs.items():
        chemin = f"{prefixe}.{nom}" if prefixe else nom
        f = champs[nom]
        defaut = f.default if f.default is not dataclasses.MISSING else None
        arguments[nom] = _verifier_type(valeur, f.type, defaut, chemin)
    try:
        return classe(**arguments)
    except ConfigurationInvalideError:
        raise
    except (BancError, ValueError) as e:
        raise ConfigurationInvalideError(prefixe, str(e)) from e


def parse_config(text):
    """
    Construit la configuration à partir d'un texte JSON.

    Args:
        text (str): Objet JSON (UTF-8)

    Returns:
        ExperimentConfig: Configuration validée

    Raises:
        ConfigurationInvalideError: Syntaxe, clé inconnue, type ou contrainte

    Example:
        >>> parse_config('{"ddpm": {"timesteps": 8000}}').ddpm.schedule().T
        8000
    """
    try:
        brut = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationInvalideError("", f"JSON invalide: {e}") from e
    if not isinstance(brut, dict):
        raise ConfigurationInvalideError("", "un objet JSON est attendu à la racine")
    champs = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
    inconnues = sorted(set(brut) - set(champs))
    if inconnues:
        raise ConfigurationInvalideError(inconnues[0], "clé inconnue")
    arguments = {}
    for nom, classe in SECTIONS.items():
        arguments[nom] = _construire(classe, brut.get(nom, {}), nom, DEFAUTS_SECTIONS.get(nom))
    for nom, valeur in brut.items():
        if nom in SECTIONS:
            continue
        f = champs[nom]
        arguments[nom] = _verifier_type(valeur, f.type, f.default, nom)
    return ExperimentConfig(**arguments)


def load_config(path):
    """
    Lit un fichier de configuration JSON.

    Raises:
        ConfigurationInvalideError: Fichier illisible ou contenu invalide
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            texte = f.read()
    except OSError as e:
        raise ConfigurationInvalideError("", f"lecture impossible de {path}: {e}") from e
    config = parse_config(texte)
    logger.info("Configuration chargée depuis %s", path)
    return config


def config_to_dict(config):
    """Dictionnaire JSON-sérialisable (relu à l'identique par ``parse_config``)."""
    def _convertir(valeur):
        if isinstance(valeur, tuple):
            return [_convertir(v) for v in valeur]
        if isinstance(valeur, dict):
            return {str(k): _convertir(v) for k, v in valeur.items()}
        return valeur

    return {cle: _convertir(v) for cle, v in dataclasses.asdict(config).items()}


def avec_surcharges(config, seed=None, out=None):
    """Applique les surcharges ``--seed`` et ``--out`` de la ligne de commande."""
    changements = {}
    if seed is not None:
        changements["master_seed"] = seed
    if out is not None:
        changements["output_dir"] = out
    return dataclasses.replace(config, **changements) if changements else config
