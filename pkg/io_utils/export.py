"""
Module Export - Export des rapports d'expérience

Ce module écrit le rapport d'une expérience dans différents formats:
    - ``runs.csv``, ``fid.csv``, ``expert.csv``: une ligne par résultat;
    - ``summary.json``: agrégats (moyenne, écart-type, valeurs) par modèle et variante;
    - ``summary.txt``: tableau lisible, cellules « 0.93 ± 0.011 »;
    - ``summary.xlsx``: les mêmes tableaux en onglets (si openpyxl est installé).

``load_report`` relit les CSV pour reconstruire le rapport.
"""

import csv
import json
import logging
import os

import pandas as pd

from exceptions import RapportInvalideError
from models.report import (
    COLONNES_EXPERT,
    COLONNES_FID,
    COLONNES_RUNS,
    METRIQUES,
    ExpertRow,
    ExperimentReport,
    FidRow,
    RunRow,
)

logger = logging.getLogger(__name__)


class Export:
    """
    Écriture des fichiers de résultats dans un répertoire.

    Attributes:
        repertoire_sortie (str): Répertoire des fichiers produits

    Example:
        >>> export = Export("sorties/report")
        >>> export.exporter_csv([ligne.en_dict() for ligne in rapport.rows], "runs.csv", COLONNES_RUNS)
    """

    def __init__(self, repertoire_sortie="sorties"):
        self.repertoire_sortie = repertoire_sortie
        os.makedirs(repertoire_sortie, exist_ok=True)

    def _chemin(self, nom_fichier):
        return os.path.join(self.repertoire_sortie, nom_fichier)

    def exporter_json(self, data, nom_fichier):
        """
        Exporte des données au format JSON.

        Returns:
            str: Chemin du fichier créé
        """
        chemin = self._chemin(nom_fichier)
        with open(chemin, "w", encoding="utf-8") as f:
            json.dump(data, f, ensure_ascii=False, indent=2)
        logger.info("Données JSON exportées: %s", chemin)
        return chemin

    def exporter_csv(self, lignes, nom_fichier, colonnes):
        """
        Exporte des lignes (dictionnaires) au format CSV, en-tête compris.

        Args:
            lignes (list): Dictionnaires colonne -> valeur
            nom_fichier (str): Nom du fichier
            colonnes (tuple): Colonnes dans l'ordre de l'en-tête

        Returns:
            str: Chemin du fichier créé
        """
        chemin = self._chemin(nom_fichier)
        with open(chemin, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=list(colonnes))
            writer.writeheader()
            writer.writerows(lignes)
        logger.info("Données CSV exportées: %s (%d lignes)", chemin, len(lignes))
        return chemin

    def exporter_texte(self, texte, nom_fichier):
        chemin = self._chemin(nom_fichier)
        with open(chemin, "w", encoding="utf-8") as f:
            f.write(texte)
        return chemin

    def exporter_excel(self, rapport, nom_fichier="summary.xlsx"):
        """
        Exporte le rapport en plusieurs onglets Excel.

        Returns:
            str | None: Chemin du fichier, ou None si openpyxl est absent
        """
        try:
            import openpyxl  # noqa: F401  pylint: disable=import-outside-toplevel,unused-import
        except ImportError:
            logger.warning("[AVERTISSEMENT EXPORT] openpyxl n'est pas installé, summary.xlsx ignoré")
            return None
        chemin = self._chemin(nom_fichier)
        with pd.ExcelWriter(chemin, engine="openpyxl") as writer:
            pd.DataFrame(tableau_resume(rapport)).to_excel(writer, sheet_name="Resume", index=False)
            pd.DataFrame([l.en_dict() for l in rapport.rows]).to_excel(writer, sheet_name="Executions", index=False)
            pd.DataFrame([l.en_dict() for l in rapport.fid_rows], columns=list(COLONNES_FID)).to_excel(
                writer, sheet_name="FID", index=False
            )
            pd.DataFrame([l.en_dict() for l in rapport.expert_rows], columns=list(COLONNES_EXPERT)).to_excel(
                writer, sheet_name="Expert", index=False
            )
        logger.info("Rapport Excel exporté: %s", chemin)
        return chemin

    def __str__(self):
        return f"Export(repertoire={self.repertoire_sortie})"


# ----------------------------------------------------------------------
# Mise en forme
# ----------------------------------------------------------------------
def tableau_resume(rapport):
    """Lignes (modèle, métrique, une cellule « moyenne ± écart-type » par variante)."""
    agregats = rapport.aggregates()
    lignes = []
    for modele in rapport.models:
        for metrique in METRIQUES:
            ligne = {"model": modele, "metric": metrique}
            for variante in rapport.variants:
                ligne[variante] = agregats[(modele, variante)][metrique].formater()
            lignes.append(ligne)
    return lignes


def rendre_resume(rapport):
    """
    Texte du résumé: un tableau par métrique, modèles en lignes, variantes en colonnes.

    Example:
        >>> print(rendre_resume(rapport))
        accuracy
        model        original        ddpm            pggan
        custom_cnn   0.91 ± 0.016    ...
    """
    agregats = rapport.aggregates()
    largeur = max(12, max(len(m) for m in rapport.models) + 2)
    blocs = [f"Exécutions par cellule: {rapport.runs}"]
    for metrique in METRIQUES:
        lignes = [metrique, "model".ljust(largeur) + "".join(v.ljust(16) for v in rapport.variants)]
        for modele in rapport.models:
            cellules = [agregats[(modele, v)][metrique].formater().ljust(16) for v in rapport.variants]
            lignes.append(modele.ljust(largeur) + "".join(cellules))
        blocs.append("\n".join(l.rstrip() for l in lignes))
    if rapport.fid_rows:
        lignes = ["FID", "generator".ljust(12) + "class".ljust(12) + "extractor".ljust(14) + "fid"]
        for l in rapport.fid_rows:
            lignes.append(l.generator.ljust(12) + l.class_name.ljust(12) + l.extractor.ljust(14) + f"{l.fid:.4f}")
        blocs.append("\n".join(lignes))
    if rapport.expert_rows:
        lignes = ["Accord expert", "generator".ljust(12) + "class".ljust(12) + "agreement"]
        for l in rapport.expert_rows:
            lignes.append(l.generator.ljust(12) + l.class_name.ljust(12) + f"{l.agreement:.3f}")
        blocs.append("\n".join(lignes))
    return "\n\n".join(blocs) + "\n"


def _resume_json(rapport):
    agregats = rapport.aggregates()
    return {
        "runs": rapport.runs,
        "aggregates": [
            {
                "model": modele,
                "variant": variante,
                "metrics": {
                    metrique: {"mean": a.mean, "std": a.std, "values": list(a.values)}
                    for metrique, a in agregats[(modele, variante)].items()
                },
            }
            for modele in rapport.models
            for variante in rapport.variants
        ],
        "fid": [l.en_dict() for l in rapport.fid_rows],
        "expert": [l.en_dict() for l in rapport.expert_rows],
    }


# ----------------------------------------------------------------------
# Écriture et relecture
# ----------------------------------------------------------------------
def emit_report(report, directory, excel=True):
    """
    Écrit tous les fichiers du rapport.

    Le rapport est validé avant toute écriture: un rapport vide ou incomplet
    ne produit aucun fichier.

    Args:
        report (ExperimentReport): Rapport complet
        directory (str): Répertoire de sortie
        excel (bool): Produire aussi ``summary.xlsx``

    Returns:
        dict: Nom logique -> chemin écrit

    Raises:
        RapportInvalideError: Rapport vide ou incomplet
        OSError: Répertoire non inscriptible
    """
    report.valider()
    resume_json = _resume_json(report)
    resume_texte = rendre_resume(report)
    export = Export(directory)
    fichiers = {
        "runs": export.exporter_csv([l.en_dict() for l in report.rows], "runs.csv", COLONNES_RUNS),
        "fid": export.exporter_csv([l.en_dict() for l in report.fid_rows], "fid.csv", COLONNES_FID),
        "expert": export.exporter_csv([l.en_dict() for l in report.expert_rows], "expert.csv", COLONNES_EXPERT),
        "summary_json": export.exporter_json(resume_json, "summary.json"),
        "summary_txt": export.exporter_texte(resume_texte, "summary.txt"),
    }
    if excel:
        chemin = export.exporter_excel(report)
        if chemin:
            fichiers["summary_xlsx"] = chemin
    return fichiers


def _lire_csv(chemin, colonnes, obligatoire):
    if not os.path.exists(chemin):
        if obligatoire:
            raise RapportInvalideError(f"fichier introuvable: {chemin}")
        return None
    df = pd.read_csv(chemin, float_precision="round_trip", dtype={c: str for c in colonnes[:2]},
                     keep_default_na=False)
    manquantes = [c for c in colonnes if c not in df.columns]
    if manquantes:
        raise RapportInvalideError(f"{chemin}: colonnes manquantes {manquantes}")
    return df


def load_report(directory):
    """
    Relit ``runs.csv`` (obligatoire), ``fid.csv`` et ``expert.csv``.

    Returns:
        ExperimentReport: Rapport reconstruit

    Raises:
        RapportInvalideError: Fichier ou colonne manquant
    """
    runs = _lire_csv(os.path.join(directory, "runs.csv"), COLONNES_RUNS, True)
    lignes = [
        RunRow(str(r.model), str(r.scenario), str(r.sampling), str(r.variant), int(r.run),
               float(r.accuracy), float(r.precision), float(r.recall), float(r.f1))
        for r in runs.itertuples(index=False)
    ]
    fid = _lire_csv(os.path.join(directory, "fid.csv"), COLONNES_FID, False)
    lignes_fid = [] if fid is None else [
        FidRow(str(g), str(c), str(e), float(v))
        for g, c, e, v in fid[list(COLONNES_FID)].itertuples(index=False, name=None)
    ]
    expert = _lire_csv(os.path.join(directory, "expert.csv"), COLONNES_EXPERT, False)
    lignes_expert = [] if expert is None else [
        ExpertRow(str(g), str(c), float(a))
        for g, c, a in expert[list(COLONNES_EXPERT)].itertuples(index=False, name=None)
    ]
    return ExperimentReport(lignes, lignes_fid, lignes_expert)
