"""
Module Affichage - Rendu console des expériences

Ce module affiche en console la configuration, l'avancement des étapes,
le résumé des résultats (moyenne ± écart-type par modèle et variante) et
les scores FID. Aucun graphique n'est produit: les CSV et le JSON du
rapport sont directement exploitables par un outil de tracé.
"""

from io_utils.export import rendre_resume

LARGEUR = 70


class Affichage:
    """
    Affichage console du banc d'augmentation.

    Attributes:
        sortie (callable): Fonction d'écriture d'une ligne (``print`` par défaut)

    Example:
        >>> affichage = Affichage()
        >>> affichage.afficher_banniere("🧪 EXPÉRIENCE COMPLÈTE")
    """

    def __init__(self, sortie=print):
        self.sortie = sortie

    def afficher_banniere(self, titre):
        self.sortie("=" * LARGEUR)
        self.sortie(titre)
        self.sortie("=" * LARGEUR)

    def afficher_configuration(self, config, chemin=None):
        """Résumé des paramètres principaux d'une ``ExperimentConfig``."""
        if chemin:
            self.sortie(f"📁 Configuration: {chemin}")
        corpus = config.corpus
        if corpus.source == "generated":
            self.sortie(f"🖼️  Corpus: procédural, {corpus.n_per_class}/classe, {corpus.size}x{corpus.size}")
        else:
            self.sortie(f"🖼️  Corpus: {corpus.path}")
        scenario = config.scenario
        self.sortie(f"🎯 Scénario: {scenario.kind} / {scenario.sampling} (facteur {scenario.desk_factor})")
        self.sortie(f"🌫️  DDPM: T={config.ddpm.timesteps}, {config.ddpm.epochs} époques")
        self.sortie(f"🧬 PGGAN: {config.pggan.steps_per_stage} pas/étage, perte {config.pggan.loss_mode}")
        self.sortie(f"🧠 Classifieurs: {', '.join(config.classifier.models)} × {config.runs} exécutions")
        self.sortie(f"🎲 Graine maîtresse: {config.master_seed}")
        self.sortie(f"💾 Sorties: {config.output_dir}")
        self.sortie("=" * LARGEUR)

    def afficher_etape(self, nom, detail=""):
        self.sortie(f"\n🚀 Étape {nom}{' - ' + detail if detail else ''}")

    def afficher_resume(self, rapport):
        """Tableaux moyenne ± écart-type, puis FID et accord expert."""
        self.sortie("\n" + "=" * LARGEUR)
        self.sortie("📈 RÉSULTATS")
        self.sortie("=" * LARGEUR)
        for ligne in rendre_resume(rapport).rstrip("\n").split("\n"):
            self.sortie(ligne)

    def afficher_fichiers(self, fichiers):
        for nom, chemin in fichiers.items():
            self.sortie(f"✅ {nom}: {chemin}")

    def __str__(self):
        return "Affichage(console)"
