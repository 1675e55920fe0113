"""
Module Pipeline - Orchestration d'une expérience d'augmentation

Étapes, chacune lisant ses entrées et écrivant ses sorties sous
``output_dir``:

    gen-corpus        corpus/<classe>/<id>.pgm, config.json
    scenario          scenario/train_ids.txt, scenario/test_<k>_ids.txt
    train-ddpm        generators/ddpm_<classe>.agb (+ _loss.csv)
    train-pggan       generators/pggan_<classe>.agb (+ _loss.csv)
    synth             synthetic/<générateur>/<classe>/<id>.pgm
    expert            experts/expert.agb, evaluation/expert.csv
    fid               evaluation/fid.csv
    train-classifier  evaluation/runs.csv
    report            report/{runs,fid,expert}.csv, summary.{json,txt,xlsx}

Toute décision aléatoire provient d'un flux dérivé de ``master_seed``: les
exécutions de classifieurs utilisent les indices 0..runs−1, les étapes des
indices réservés au-delà de 1 000 000.
"""

import json
import logging
import os
from dataclasses import replace

from core.classify import (
    CLASSE_POSITIVE,
    TrainedClassifier,
    constructeur,
    entrainer_classifieur,
    train_and_evaluate,
)
from core.config import config_to_dict
from core.corpus import generate_synthetic_corpus, load_corpus, save_corpus
from core.denoiser import UNet
from core.diffusion import sample_images, train_ddpm
from core.metrics import bruit_uniforme, expert_agreement, fid
from core.pggan import charger_generateur, generate, train_pggan
from core.rng import derive_stream
from core.selection import build_scenario, mix_with_synthetic
from exceptions import BancError, EtapeEchoueeError, JeuDonneesInvalideError, SelectionError
from io_utils.checkpoint import load_checkpoint, save_checkpoint
from io_utils.export import Export, emit_report, load_report
from models.dataset import LabeledDataset
from models.report import COLONNES_EXPERT, COLONNES_FID, COLONNES_RUNS, VARIANTES, ExpertRow, FidRow, RunRow

logger = logging.getLogger(__name__)

GENERATEURS = ("ddpm", "pggan")

FLUX_SCENARIO = 1_000_000
FLUX_DDPM = 1_000_001
FLUX_PGGAN = 1_000_002
FLUX_SYNTHESE = 1_000_003
FLUX_EXPERT = 1_000_004
FLUX_BRUIT = 1_000_005

ETAPES = ("gen-corpus", "scenario", "train-ddpm", "train-pggan", "synth", "expert", "fid",
          "train-classifier", "report")


class Pipeline:
    """
    Exécute les étapes d'une expérience à partir d'une ``ExperimentConfig``.

    Attributes:
        config (ExperimentConfig): Configuration validée
        sortie (str): Répertoire racine des artefacts
        afficher_progression (bool): Barres de progression tqdm

    Example:
        >>> rapport = Pipeline(load_config("data/config_smoke.json")).executer()
        >>> len(rapport.rows)
        12
    """

    def __init__(self, config, afficher_progression=False):
        self.config = config
        self.sortie = config.output_dir
        self.afficher_progression = afficher_progression

    def __str__(self):
        return f"Pipeline(sortie={self.sortie}, graine={self.config.master_seed})"

    # ------------------------------------------------------------------
    # Chemins et flux
    # ------------------------------------------------------------------
    def chemin(self, *parties):
        return os.path.join(self.sortie, *parties)

    def flux(self, index):
        return derive_stream(self.config.master_seed, index)

    def _repertoire(self, *parties):
        chemin = self.chemin(*parties)
        os.makedirs(chemin, exist_ok=True)
        return chemin

    def classes_augmentees(self, class_names):
        """Classes recevant des images synthétiques: toutes (small) ou la minoritaire."""
        if self.config.scenario.kind == "small":
            return list(class_names)
        return [class_names[CLASSE_POSITIVE]]

    # ------------------------------------------------------------------
    # Exécution
    # ------------------------------------------------------------------
    def executer_etape(self, nom, fonction):
        """
        Exécute une étape et convertit ses échecs en ``EtapeEchoueeError``.

        Les artefacts partiels restent sur disque pour le diagnostic.
        """
        logger.info("Étape %s", nom)
        try:
            return fonction()
        except EtapeEchoueeError:
            raise
        except (BancError, OSError, ValueError, FloatingPointError) as e:
            logger.error("[ERREUR ETAPE %s] %s", nom, e)
            raise EtapeEchoueeError(nom, e) from e

    def etape(self, nom):
        """Exécute l'étape nommée (nom de sous-commande)."""
        fonctions = {
            "gen-corpus": self.generer_corpus,
            "scenario": self.construire_scenario,
            "train-ddpm": self.entrainer_ddpm,
            "train-pggan": self.entrainer_pggan,
            "synth": self.synthetiser,
            "expert": self.controler_expert,
            "fid": self.mesurer_fid,
            "train-classifier": self.entrainer_classifieurs,
            "report": self.produire_rapport,
        }
        if nom not in fonctions:
            raise EtapeEchoueeError(nom, "étape inconnue")
        return self.executer_etape(nom, fonctions[nom])

    def executer(self):
        """
        Exécute toutes les étapes dans l'ordre.

        Returns:
            ExperimentReport: Rapport de l'expérience

        Raises:
            EtapeEchoueeError: Au premier échec, avec le nom de l'étape
        """
        resultat = None
        for nom in ETAPES:
            resultat = self.etape(nom)
        return resultat

    # ------------------------------------------------------------------
    # Corpus et scénario
    # ------------------------------------------------------------------
    def generer_corpus(self):
        """Génère (ou lit) le corpus réel et le persiste sous ``corpus/``."""
        cfg = self.config.corpus
        os.makedirs(self.sortie, exist_ok=True)
        with open(self.chemin("config.json"), "w", encoding="utf-8") as f:
            json.dump(config_to_dict(self.config), f, ensure_ascii=False, indent=2)
        if cfg.source == "generated":
            corpus = generate_synthetic_corpus(cfg.n_per_class, cfg.size, derive_stream(cfg.seed, 0))
        else:
            corpus = load_corpus(cfg.path)
        save_corpus(corpus, self._repertoire("corpus"))
        logger.info("Corpus persisté: %s", corpus)
        return corpus

    def charger_corpus(self):
        return load_corpus(self.chemin("corpus"))

    def construire_scenario(self):
        """Construit entraînement et jeux de test; persiste les listes d'ids."""
        corpus = self.charger_corpus()
        train, tests = build_scenario(corpus, self.config.scenario, self.flux(FLUX_SCENARIO))
        repertoire = self._repertoire("scenario")
        _ecrire_ids(os.path.join(repertoire, "train_ids.txt"), train.ids)
        for k, test in enumerate(tests):
            _ecrire_ids(os.path.join(repertoire, f"test_{k}_ids.txt"), test.ids)
        verifier_disjonction(train, tests)
        return train, tests

    def charger_scenario(self):
        """Relit le scénario persisté (jeu d'entraînement, jeux de test)."""
        corpus = self.charger_corpus()
        repertoire = self.chemin("scenario")
        train = corpus.par_ids(_lire_ids(os.path.join(repertoire, "train_ids.txt")), "train")
        tests, k = [], 0
        while os.path.exists(os.path.join(repertoire, f"test_{k}_ids.txt")):
            ids = _lire_ids(os.path.join(repertoire, f"test_{k}_ids.txt"))
            tests.append(corpus.par_ids(ids, "test"))
            k += 1
        if not tests:
            raise JeuDonneesInvalideError(f"aucun jeu de test dans {repertoire}")
        verifier_disjonction(train, tests)
        return train, tests

    # ------------------------------------------------------------------
    # Générateurs
    # ------------------------------------------------------------------
    def _config_gan(self, taille):
        cfg = self.config.pggan
        if cfg.target_resolution != taille:
            logger.warning("[AVERTISSEMENT PGGAN] target_resolution %d ramenée à la taille du corpus %d",
                           cfg.target_resolution, taille)
            cfg = replace(cfg, target_resolution=taille)
        return cfg

    def entrainer_ddpm(self):
        """Un DDPM par classe augmentée, entraîné sur les images réelles d'entraînement."""
        train, _ = self.charger_scenario()
        repertoire = self._repertoire("generators")
        export = Export(repertoire)
        for classe in self.classes_augmentees(train.class_names):
            indice = train.class_names.index(classe)
            modele, historique = train_ddpm(
                train.images_classe(classe), self.config.ddpm, self.flux(FLUX_DDPM).derive(indice),
                self.afficher_progression, f"DDPM {classe}",
            )
            save_checkpoint(modele.state_dict(), os.path.join(repertoire, f"ddpm_{classe}.agb"))
            export.exporter_csv([{"epoch": e, "loss": p} for e, p in enumerate(historique)],
                                f"ddpm_{classe}_loss.csv", ("epoch", "loss"))

    def entrainer_pggan(self):
        """Un PGGAN par classe augmentée."""
        train, _ = self.charger_scenario()
        repertoire = self._repertoire("generators")
        cfg = self._config_gan(train.geometrie[-1])
        for classe in self.classes_augmentees(train.class_names):
            indice = train.class_names.index(classe)
            entrees, trace = train_pggan(train.images_classe(classe), cfg,
                                         self.flux(FLUX_PGGAN).derive(indice),
                                         self.afficher_progression, f"PGGAN {classe}")
            save_checkpoint(entrees, os.path.join(repertoire, f"pggan_{classe}.agb"))
            trace.to_csv(os.path.join(repertoire, f"pggan_{classe}_loss.csv"))

    def _charger_ddpm(self, classe, taille):
        modele = UNet(self.config.ddpm.unet(taille))
        modele.load_state_dict(load_checkpoint(self.chemin("generators", f"ddpm_{classe}.agb")))
        return modele.eval()

    def synthetiser(self):
        """``synth_per_class`` images par générateur et par classe augmentée, persistées en PGM."""
        train, _ = self.charger_scenario()
        taille = train.geometrie[-1]
        n = self.config.synth_per_class
        for g, generateur in enumerate(GENERATEURS):
            for classe in self.classes_augmentees(train.class_names):
                indice = train.class_names.index(classe)
                flux = self.flux(FLUX_SYNTHESE).derive(g).derive(indice)
                if generateur == "ddpm":
                    images = sample_images(self._charger_ddpm(classe, taille), self.config.ddpm.schedule(),
                                           n, flux, taille_lot=self.config.ddpm.sample_batch)
                else:
                    entrees = load_checkpoint(self.chemin("generators", f"pggan_{classe}.agb"))
                    images = generate(charger_generateur(entrees, self._config_gan(taille)), n, flux)
                jeu = LabeledDataset(images, [0] * n, [f"{generateur}_{classe}_{i:05d}" for i in range(n)],
                                     [classe], f"synthetic-{generateur}")
                save_corpus(jeu, self._repertoire("synthetic", generateur))
                logger.info("%d images %s synthétisées pour %s", n, generateur, classe)

    def charger_synthetiques(self, generateur, class_names):
        """Classe -> ``LabeledDataset`` synthétique (classes augmentées seulement)."""
        jeu = load_corpus(self.chemin("synthetic", generateur), provenance=f"synthetic-{generateur}")
        par_classe = {}
        for classe in self.classes_augmentees(class_names):
            if classe not in jeu.class_names:
                raise JeuDonneesInvalideError(f"aucune image {generateur} pour {classe}")
            par_classe[classe] = jeu.sous_ensemble(jeu.indices_classe(classe))
        return par_classe

    # ------------------------------------------------------------------
    # Évaluation des images synthétiques
    # ------------------------------------------------------------------
    def _nouvel_expert(self, rng=None):
        cfg = self.config.classifier
        fabrique = constructeur(cfg.expert_model, cfg.input_size, cfg.backbone_checkpoint)
        return fabrique(rng=rng)

    def controler_expert(self):
        """Entraîne l'expert sur les seules données réelles et mesure son accord."""
        train, _ = self.charger_scenario()
        cfg = self.config.classifier
        flux = self.flux(FLUX_EXPERT)
        expert, _, _ = entrainer_classifieur(
            self._nouvel_expert(flux.derive(0)), train, cfg.expert_epochs, cfg.batch_size,
            cfg.lr, flux.derive(1), afficher_progression=self.afficher_progression, description="expert",
        )
        save_checkpoint(expert.modele.state_dict(), os.path.join(self._repertoire("experts"), "expert.agb"))
        lignes = []
        for generateur in GENERATEURS:
            for classe, jeu in self.charger_synthetiques(generateur, train.class_names).items():
                lignes.append(ExpertRow(generateur, classe, expert_agreement(expert, jeu.images, classe)))
        Export(self._repertoire("evaluation")).exporter_csv([l.en_dict() for l in lignes], "expert.csv",
                                                             COLONNES_EXPERT)
        return lignes

    def charger_expert(self, train):
        modele = self._nouvel_expert()
        modele.load_state_dict(load_checkpoint(self.chemin("experts", "expert.agb")))
        return TrainedClassifier(modele.eval(), train.class_names, train.geometrie)

    def mesurer_fid(self):
        """FID de chaque générateur (et du bruit uniforme) contre la classe réelle d'entraînement."""
        train, _ = self.charger_scenario()
        extracteurs = self.config.fid_extractors
        expert = self.charger_expert(train) if "expert" in extracteurs else None
        synthetiques = {g: self.charger_synthetiques(g, train.class_names) for g in GENERATEURS}
        lignes = []
        for classe in self.classes_augmentees(train.class_names):
            reels = train.images_classe(classe)
            indice = train.class_names.index(classe)
            bruit = bruit_uniforme(self.config.synth_per_class, train.geometrie,
                                   self.flux(FLUX_BRUIT).derive(indice))
            candidats = [(g, synthetiques[g][classe].images) for g in GENERATEURS] + [("noise", bruit)]
            for extracteur in extracteurs:
                for generateur, images in candidats:
                    score = fid(images, reels, extracteur, expert)
                    lignes.append(FidRow(generateur, classe, extracteur, score))
                    logger.info("FID %s/%s (%s): %.4f", generateur, classe, extracteur, score)
        Export(self._repertoire("evaluation")).exporter_csv([l.en_dict() for l in lignes], "fid.csv", COLONNES_FID)
        return lignes

    # ------------------------------------------------------------------
    # Classifieurs et rapport
    # ------------------------------------------------------------------
    def jeux_variantes(self, train):
        """Variante -> jeu d'entraînement (réel, mixte DDPM, mixte PGGAN)."""
        ajouts = {c: self.config.synth_per_class for c in self.classes_augmentees(train.class_names)}
        jeux = {"original": train}
        for generateur in GENERATEURS:
            jeux[generateur] = mix_with_synthetic(train, self.charger_synthetiques(generateur, train.class_names),
                                                  ajouts)
        return jeux

    def entrainer_classifieurs(self):
        """Modèles × variantes × exécutions; écrit ``evaluation/runs.csv``."""
        train, tests = self.charger_scenario()
        cfg = self.config.classifier
        protocole = cfg.protocol(self.config.runs)
        scenario = self.config.scenario
        lignes = []
        for variante, jeu in self.jeux_variantes(train).items():
            for modele in cfg.models:
                resultats = train_and_evaluate(
                    constructeur(modele, cfg.input_size, cfg.backbone_checkpoint), jeu, tests, protocole,
                    self.config.master_seed, cfg.epochs(modele), self.afficher_progression,
                    f"{modele}/{variante}",
                )
                for r in resultats:
                    m = r.metrics
                    lignes.append(RunRow(modele, scenario.kind, scenario.sampling, variante, r.run,
                                         m.accuracy, m.precision, m.recall, m.f1))
        lignes.sort(key=lambda l: (cfg.models.index(l.model), VARIANTES.index(l.variant), l.run))
        Export(self._repertoire("evaluation")).exporter_csv([l.en_dict() for l in lignes], "runs.csv",
                                                             COLONNES_RUNS)
        return lignes

    def produire_rapport(self):
        """Assemble les résultats persistés et écrit ``report/``."""
        rapport = load_report(self.chemin("evaluation"))
        emit_report(rapport, self.chemin("report"))
        return rapport


def run_experiment(config, afficher_progression=False):
    """
    Exécute une expérience complète.

    Args:
        config (ExperimentConfig): Configuration validée
        afficher_progression (bool): Barres de progression

    Returns:
        ExperimentReport: Rapport (également écrit sous ``<output_dir>/report``)

    Raises:
        EtapeEchoueeError: Échec d'une étape (nom dans ``etape``)
    """
    return Pipeline(config, afficher_progression).executer()


# ----------------------------------------------------------------------
# Listes d'ids et audit
# ----------------------------------------------------------------------
def _ecrire_ids(chemin, ids):
    with open(chemin, "w", encoding="utf-8") as f:
        f.write("".join(f"{i}\n" for i in ids))


def _lire_ids(chemin):
    if not os.path.exists(chemin):
        raise JeuDonneesInvalideError(f"liste d'ids introuvable: {chemin}")
    with open(chemin, "r", encoding="utf-8") as f:
        return [ligne.strip() for ligne in f if ligne.strip()]


def verifier_disjonction(train, tests):
    """
    Vérifie qu'aucune image de test n'est dans le jeu d'entraînement.

    Raises:
        SelectionError: Fuite détectée
    """
    ids_train = set(train.ids)
    for k, test in enumerate(tests):
        communs = ids_train.intersection(test.ids)
        if communs:
            raise SelectionError(f"fuite: {len(communs)} ids du jeu de test {k} dans l'entraînement")


def auditer_fuites(sortie):
    """
    Audit des listes persistées d'une expérience.

    Returns:
        dict: Nom de l'intersection -> nombre d'ids communs (tous nuls sans fuite)
    """
    repertoire = os.path.join(sortie, "scenario")
    train = set(_lire_ids(os.path.join(repertoire, "train_ids.txt")))
    synthetiques = set()
    racine = os.path.join(sortie, "synthetic")
    if os.path.isdir(racine):
        for _, _, fichiers in os.walk(racine):
            synthetiques.update(f[:-len(".pgm")] for f in fichiers if f.endswith(".pgm"))
    audit, k = {}, 0
    while os.path.exists(os.path.join(repertoire, f"test_{k}_ids.txt")):
        test = set(_lire_ids(os.path.join(repertoire, f"test_{k}_ids.txt")))
        audit[f"train&test_{k}"] = len(train & test)
        audit[f"synthetic&test_{k}"] = len(synthetiques & test)
        k += 1
    return audit


def moyennes_par_variante(rapport, metrique="accuracy"):
    """(modèle, variante) -> moyenne de ``metrique`` sur les exécutions."""
    return {cle: agregats[metrique].mean for cle, agregats in rapport.aggregates().items()}
