"""
Module Report - Rapport d'expérience

Ce module définit les lignes du rapport (une par exécution de classifieur,
une par score FID, une par contrôle expert) et ``ExperimentReport`` qui les
regroupe et calcule les agrégats moyenne ± écart-type par (modèle, variante).
"""

from dataclasses import dataclass, field

from core.metrics import run_stats
from exceptions import RapportInvalideError

VARIANTES = ("original", "ddpm", "pggan")
METRIQUES = ("accuracy", "precision", "recall", "f1")

COLONNES_RUNS = ("model", "scenario", "sampling", "variant", "run") + METRIQUES
COLONNES_FID = ("generator", "class", "extractor", "fid")
COLONNES_EXPERT = ("generator", "class", "agreement")


@dataclass(frozen=True)
class RunRow:
    """Métriques d'une exécution d'un classifieur sur une variante d'entraînement."""

    model: str
    scenario: str
    sampling: str
    variant: str
    run: int
    accuracy: float
    precision: float
    recall: float
    f1: float

    def en_dict(self):
        return {colonne: getattr(self, colonne) for colonne in COLONNES_RUNS}


@dataclass(frozen=True)
class FidRow:
    """FID d'un générateur pour une classe, contre la classe réelle d'entraînement."""

    generator: str
    class_name: str
    extractor: str
    fid: float

    def en_dict(self):
        return {"generator": self.generator, "class": self.class_name,
                "extractor": self.extractor, "fid": self.fid}


@dataclass(frozen=True)
class ExpertRow:
    """Taux d'accord de l'expert sur les images synthétiques d'une classe."""

    generator: str
    class_name: str
    agreement: float

    def en_dict(self):
        return {"generator": self.generator, "class": self.class_name, "agreement": self.agreement}


@dataclass
class ExperimentReport:
    """
    Résultats d'une expérience.

    Attributes:
        rows (list): ``RunRow``, modèles × variantes × exécutions
        fid_rows (list): ``FidRow``
        expert_rows (list): ``ExpertRow``
        variants (tuple): Variantes attendues

    Example:
        >>> rapport.aggregates()[("custom_cnn", "ddpm")]["accuracy"].formater()
        '0.91 ± 0.016'
    """

    rows: list = field(default_factory=list)
    fid_rows: list = field(default_factory=list)
    expert_rows: list = field(default_factory=list)
    variants: tuple = VARIANTES

    @property
    def models(self):
        return list(dict.fromkeys(r.model for r in self.rows))

    def _groupes(self):
        groupes = {}
        for ligne in self.rows:
            groupes.setdefault((ligne.model, ligne.variant), []).append(ligne)
        return groupes

    def valider(self):
        """
        Vérifie que le rapport est complet.

        Raises:
            RapportInvalideError: Rapport vide, variante manquante, ou nombre
                d'exécutions différent selon (modèle, variante)
        """
        if not self.rows:
            raise RapportInvalideError("rapport sans ligne d'exécution")
        groupes = self._groupes()
        inattendues = sorted({v for _, v in groupes} - set(self.variants))
        if inattendues:
            raise RapportInvalideError(f"variantes inattendues: {inattendues}")
        tailles = set()
        for modele in self.models:
            for variante in self.variants:
                lignes = groupes.get((modele, variante), [])
                if not lignes:
                    raise RapportInvalideError(f"variante '{variante}' vide pour le modèle '{modele}'")
                runs = sorted(l.run for l in lignes)
                if runs != list(range(len(runs))):
                    raise RapportInvalideError(f"exécutions {runs} pour ({modele}, {variante})")
                tailles.add(len(runs))
        if len(tailles) != 1 or min(tailles) < 2:
            raise RapportInvalideError(f"nombres d'exécutions incohérents: {sorted(tailles)}")
        return self

    @property
    def runs(self):
        return len(self.rows) // (len(self.models) * len(self.variants))

    def aggregates(self):
        """
        Agrégats par (modèle, variante).

        Returns:
            dict: (modèle, variante) -> {métrique: RunAggregate}
        """
        self.valider()
        groupes = self._groupes()
        return {
            (modele, variante): {
                metrique: run_stats([getattr(l, metrique) for l in sorted(groupes[(modele, variante)],
                                                                         key=lambda l: l.run)])
                for metrique in METRIQUES
            }
            for modele in self.models
            for variante in self.variants
        }
