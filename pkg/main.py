#!/usr/bin/env python3
"""
Module principal - Point d'entrée du banc d'augmentation d'images

Chaque sous-commande exécute une étape du pipeline à partir d'une
configuration JSON; ``experiment`` les enchaîne toutes.
"""
import argparse
import os
import sys

# Ajouter le répertoire du projet au chemin pour importer les modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))
from core.config import avec_surcharges, load_config, parse_config
from core.pipeline import ETAPES, Pipeline
from exceptions import ConfigurationInvalideError, EtapeEchoueeError
from io_utils.affichage import Affichage
from io_utils.journal import configurer_journal

SOUS_COMMANDES = {
    "gen-corpus": "Générer (ou lire) le corpus réel",
    "scenario": "Construire les jeux d'entraînement et de test",
    "train-ddpm": "Entraîner un DDPM par classe augmentée",
    "train-pggan": "Entraîner un PGGAN par classe augmentée",
    "synth": "Synthétiser les images de chaque générateur",
    "expert": "Entraîner l'expert et mesurer son accord sur les images synthétiques",
    "fid": "Mesurer les FID générateur / classe réelle",
    "train-classifier": "Entraîner et évaluer les classifieurs sur chaque variante",
    "report": "Assembler et écrire le rapport",
    "experiment": "Exécuter toutes les étapes",
}


def construire_parser():
    """Analyseur de la ligne de commande (une sous-commande par étape)."""
    parser = argparse.ArgumentParser(
        description="Banc d'augmentation d'images: DDPM, PGGAN, FID et classifieurs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Exemples d'utilisation:
  python main.py experiment                                 # Expérience par défaut
  python main.py experiment -c data/config_smoke.json       # Expérience réduite
  python main.py scenario --seed 3 --out sorties_seed3      # Une étape, graine et sortie surchargées
  python main.py report --out sorties                       # Réécrire le rapport
        """
    )
    sous_parsers = parser.add_subparsers(dest="commande", required=True)
    for nom, aide in SOUS_COMMANDES.items():
        sous = sous_parsers.add_parser(nom, help=aide, description=aide)
        sous.add_argument(
            '-c', '--config',
            default='data/config_experience.json',
            help='Fichier de configuration JSON (défaut: data/config_experience.json)'
        )
        sous.add_argument('--seed', type=int, default=None, help='Graine maîtresse (remplace master_seed)')
        sous.add_argument('--out', default=None, help='Répertoire de sortie (remplace output_dir)')
        sous.add_argument('--no-progress', action='store_true', help='Désactiver les barres de progression')
        sous.add_argument('-v', '--verbose', action='store_true', help='Journal au niveau DEBUG')
    return parser


def charger_configuration(chemin):
    """Configuration du fichier, ou configuration par défaut si le fichier est absent."""
    if not os.path.exists(chemin):
        print(f"⚠️  Fichier de configuration {chemin} non trouvé, configuration par défaut utilisée.")
        return parse_config("{}")
    return load_config(chemin)


def main(argv=None):
    """
    Analyse la ligne de commande et exécute l'étape demandée.

    Returns:
        int: 0 succès, 1 échec d'étape, 2 configuration invalide, 130 interruption
    """
    args = construire_parser().parse_args(argv)
    configurer_journal(args.verbose)
    affichage = Affichage()
    try:
        config = avec_surcharges(charger_configuration(args.config), seed=args.seed, out=args.out)
    except ConfigurationInvalideError as e:
        print(f"[ERREUR CONFIGURATION] {e}", file=sys.stderr)
        return 2

    affichage.afficher_banniere("🧪 BANC D'AUGMENTATION D'IMAGES")
    affichage.afficher_configuration(config, args.config)
    pipeline = Pipeline(config, afficher_progression=not args.no_progress)
    etapes = ETAPES if args.commande == "experiment" else (args.commande,)
    try:
        resultat = None
        for nom in etapes:
            affichage.afficher_etape(nom)
            resultat = pipeline.etape(nom)
        if etapes[-1] == "report":
            affichage.afficher_resume(resultat)
        print("\n" + "=" * 70)
        print(f"✅ {args.commande.upper()} TERMINÉ AVEC SUCCÈS")
        print("=" * 70)
        return 0
    except EtapeEchoueeError as e:
        print(f"[ERREUR ETAPE {e.etape}] {e.cause}", file=sys.stderr)
        if args.verbose:
            import traceback  # pylint: disable=import-outside-toplevel
            traceback.print_exc()
        return 1
    except KeyboardInterrupt:
        print("\n⏹️  Exécution interrompue par l'utilisateur", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
