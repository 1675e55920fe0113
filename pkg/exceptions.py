"""
Module Exceptions - Définitions des exceptions personnalisées
pour le banc d'augmentation générative.
"""

# Exception de base pour tout le banc
class BancError(Exception):
    """Exception de base pour toutes les erreurs du banc."""
    pass

# -----------------------------
# Exceptions liées au calcul numérique (autodiff, optimiseur)
# -----------------------------
class NumeriqueError(BancError):
    """Exception générale liée au moteur numérique."""
    pass

class FormeInvalideError(NumeriqueError, ValueError):
    """Levée quand les formes de deux tenseurs sont incompatibles pour une opération."""
    pass

class EntreeNonLieeError(NumeriqueError, KeyError):
    """Levée quand une entrée déclarée du graphe n'est pas fournie."""
    pass

class ValeurNonFinieError(NumeriqueError, FloatingPointError):
    """Levée quand un NaN ou un Inf apparaît dans un calcul vérifié."""
    pass

class RetropropagationError(NumeriqueError, RuntimeError):
    """Levée quand la rétropropagation est impossible (graphe non évalué, perte non scalaire)."""
    pass

class LongueurIncoherenteError(NumeriqueError, ValueError):
    """Levée quand paramètres, gradients et état Adam n'ont pas la même longueur."""
    pass

# -----------------------------
# Exceptions liées à la diffusion et au débruiteur
# -----------------------------
class DiffusionError(BancError):
    """Exception générale liée au processus de diffusion."""
    pass

class OrdonnancementInvalideError(DiffusionError, ValueError):
    """Levée quand les bornes d'un ordonnancement de bruit sont invalides."""
    pass

class PasHorsBornesError(DiffusionError, IndexError):
    """Levée quand un pas de temps t sort de l'intervalle [1, T]."""
    pass

class DimensionPlongementError(DiffusionError, ValueError):
    """Levée quand la dimension du plongement temporel est impaire."""
    pass

# -----------------------------
# Exceptions liées au GAN progressif
# -----------------------------
class GanError(BancError):
    """Exception générale liée au GAN progressif."""
    pass

class CroissanceInvalideError(GanError):
    """Levée quand une croissance est demandée avant la fin du fondu ou au-delà de la résolution cible."""
    pass

class ProbabiliteInvalideError(GanError, ValueError):
    """Levée quand une probabilité logistique sort de l'intervalle ouvert (0, 1)."""
    pass

class JeuDonneesInsuffisantError(GanError, ValueError):
    """Levée quand le jeu d'entraînement est plus petit que la taille de lot."""
    pass

class EntrainementInstableError(GanError):
    """Levée quand une perte non finie apparaît pendant l'entraînement.

    La trace partielle des pertes est conservée dans l'attribut ``trace``.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace

# -----------------------------
# Exceptions liées à la sélection des données
# -----------------------------
class SelectionError(BancError):
    """Exception générale liée à la construction des jeux de données."""
    pass

class EffectifInfaisableError(SelectionError, ValueError):
    """Levée quand un effectif demandé dépasse l'effectif disponible."""
    pass

class GeometrieIncompatibleError(SelectionError, ValueError):
    """Levée quand des images n'ont pas la même géométrie."""
    pass

class JeuDonneesInvalideError(SelectionError, ValueError):
    """Levée quand un jeu étiqueté viole ses invariants (ids dupliqués, étiquette inconnue)."""
    pass

# -----------------------------
# Exceptions liées aux métriques
# -----------------------------
class MetriqueError(BancError):
    """Exception générale liée aux métriques."""
    pass

class StatistiquesInsuffisantesError(MetriqueError, ValueError):
    """Levée quand il y a moins de deux échantillons pour une statistique."""
    pass

class DimensionIncompatibleError(MetriqueError, ValueError):
    """Levée quand deux distributions ou deux vecteurs n'ont pas la même dimension."""
    pass

class MatriceNonSymetriqueError(MetriqueError, ValueError):
    """Levée quand une covariance n'est pas symétrique à la tolérance près."""
    pass

class EtiquetteInconnueError(MetriqueError, ValueError):
    """Levée quand une étiquette ne fait pas partie des classes binaires attendues."""
    pass

# -----------------------------
# Exceptions liées à la classification
# -----------------------------
class ClassificationError(BancError):
    """Exception générale liée aux classifieurs."""
    pass

class TailleEntreeInvalideError(ClassificationError, ValueError):
    """Levée quand la taille d'entrée d'une architecture est invalide."""
    pass

# -----------------------------
# Exceptions liées au corpus et aux fichiers
# -----------------------------
class CorpusError(BancError):
    """Exception générale liée au corpus d'images."""
    pass

class FormatPgmInvalideError(CorpusError):
    """Levée quand un fichier PGM est mal formé. Le message nomme le fichier."""

    def __init__(self, chemin, raison):
        super().__init__(f"{chemin}: {raison}")
        self.chemin = chemin

class CheckpointInvalideError(CorpusError):
    """Levée quand un fichier de checkpoint est tronqué, dupliqué ou de format inconnu."""
    pass

# -----------------------------
# Exceptions liées au pipeline
# -----------------------------
class ConfigurationInvalideError(BancError, ValueError):
    """Levée quand la configuration JSON est invalide. ``chemin`` nomme la clé fautive."""

    def __init__(self, chemin, raison):
        super().__init__(f"{chemin}: {raison}" if chemin else raison)
        self.chemin = chemin

class RapportInvalideError(BancError):
    """Levée quand un rapport est vide ou incomplet."""
    pass

class EtapeEchoueeError(BancError):
    """Levée quand une étape du pipeline échoue. ``etape`` nomme l'étape."""

    def __init__(self, etape, cause):
        super().__init__(f"[ETAPE {etape}] {cause}")
        self.etape = etape
        self.cause = cause
