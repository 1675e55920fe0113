"""
Tests pour la construction des jeux d'entraînement et de test

Objectif : vérifier l'échantillonnage aléatoire et Greedy-K, les scénarios
équilibré et déséquilibré, et le mélange avec des images synthétiques.
"""

import logging

import numpy as np
import pytest
from scipy.spatial.distance import cdist

from conftest import jeu_aleatoire
from core.rng import derive_stream
from core.selection import (
    ScenarioSpec,
    build_scenario,
    farthest_point_indices,
    greedy_k_select,
    greedy_k_split,
    mix_with_synthetic,
    random_split,
)
from exceptions import EffectifInfaisableError, GeometrieIncompatibleError, SelectionError
from models.dataset import LabeledDataset


def greedy_force_brute(points, k):
    """Parcours du point le plus éloigné écrit sans aucune mise à jour incrémentale."""
    points = np.asarray(points, dtype=np.float64)
    distances_centre = np.sum((points - points.mean(axis=0)) ** 2, axis=1)
    selection = [int(np.argmax(distances_centre))]
    while len(selection) < k:
        meilleur, valeur = None, -1.0
        for i in range(len(points)):
            if i in selection:
                continue
            d = min(float(np.sum((points[i] - points[j]) ** 2)) for j in selection)
            if d > valeur:
                meilleur, valeur = i, d
        selection.append(meilleur)
    return selection


class TestGreedyK:
    """Tests pour la sélection Greedy-K."""

    def test_exemple_1d(self):
        """Test {0, 1, 2, 10}, k = 3: on choisit 10, puis 0, puis 2."""
        assert greedy_k_select(np.array([[0.0], [1.0], [2.0], [10.0]]), 3) == [3, 0, 2]

    def test_egalite_plus_petit_index(self):
        """Test que les égalités sont tranchées vers le plus petit index."""
        assert farthest_point_indices(np.array([[0.0], [2.0], [-2.0]]), 2) == [1, 2]

    @pytest.mark.parametrize("graine", [0, 1, 2])
    def test_contre_force_brute(self, graine):
        """Test l'accord avec une implémentation directe sur des points aléatoires."""
        points = derive_stream(graine, 0).normale((40, 5))
        assert farthest_point_indices(points, 12) == greedy_force_brute(points, 12)

    def test_petits_jeux_force_brute(self):
        """Test la séquence exacte sur 200 jeux de 2 à 12 points, k de 1 à N."""
        flux = derive_stream(5, 0)
        for _ in range(200):
            n = int(flux.entiers(2, 13))
            k = int(flux.entiers(1, n + 1))
            dimension = int(flux.entiers(1, 5))
            points = flux.normale((n, dimension))
            assert greedy_k_select(points, k) == greedy_force_brute(points, k), (n, k, dimension)

    def test_distance_minimale_maximisee(self):
        """Test que chaque point ajouté maximise sa distance minimale à la sélection."""
        points = derive_stream(4, 0).normale((30, 3))
        selection = farthest_point_indices(points, 10)
        distances = cdist(points, points, metric="sqeuclidean")
        for pas in range(1, len(selection)):
            deja = selection[:pas]
            minima = distances[:, deja].min(axis=1)
            minima[deja] = -1.0
            assert minima[selection[pas]] == pytest.approx(minima.max())

    def test_selection_sans_doublon(self):
        """Test que k = N sélectionne chaque point une fois."""
        assert sorted(farthest_point_indices(derive_stream(0, 0).normale((7, 2)), 7)) == list(range(7))

    def test_ids_d_un_jeu(self):
        """Test que la sélection sur un jeu rend des ids."""
        jeu = jeu_aleatoire(5, 5)
        ids = greedy_k_select(jeu, 3)
        assert len(ids) == 3 and set(ids) <= set(jeu.ids)

    @pytest.mark.parametrize("k", [0, 5])
    def test_k_infaisable(self, k):
        """Test k hors de [1, N]."""
        with pytest.raises(EffectifInfaisableError):
            greedy_k_select(np.zeros((4, 1)), k)

    def test_jeu_vide(self):
        """Test qu'un jeu vide est refusé."""
        with pytest.raises(SelectionError):
            farthest_point_indices(np.zeros((0, 2)), 1)

    def test_par_classe(self):
        """Test que Greedy-K respecte l'effectif de chaque classe."""
        jeu = jeu_aleatoire(10, 6)
        choisis, reste = greedy_k_split(jeu, {"class_0": 4, "class_1": 2})
        assert choisis.compte_par_classe() == {"class_0": 4, "class_1": 2}
        assert len(reste) == 10
        assert not set(choisis.ids) & set(reste.ids)


class TestRandomSplit:
    """Tests pour l'échantillonnage aléatoire."""

    def test_partition(self):
        """Test les effectifs, la disjonction et la couverture."""
        jeu = jeu_aleatoire(10, 8)
        choisis, reste = random_split(jeu, {"class_0": 3, "class_1": 5}, derive_stream(0, 0))
        assert choisis.compte_par_classe() == {"class_0": 3, "class_1": 5}
        assert sorted(choisis.ids + reste.ids) == sorted(jeu.ids)

    def test_reproductible(self):
        """Test que la même graine donne la même sélection."""
        jeu = jeu_aleatoire(10, 8)
        a, _ = random_split(jeu, [3, 3], derive_stream(5, 0))
        b, _ = random_split(jeu, [3, 3], derive_stream(5, 0))
        assert a.ids == b.ids

    def test_effectif_trop_grand(self):
        """Test qu'un effectif supérieur au disponible est refusé."""
        with pytest.raises(EffectifInfaisableError):
            random_split(jeu_aleatoire(3, 3), {"class_0": 4}, derive_stream(0, 0))

    def test_classe_inconnue(self):
        """Test qu'une classe inconnue est refusée."""
        with pytest.raises(SelectionError):
            random_split(jeu_aleatoire(3, 3), {"chat": 1}, derive_stream(0, 0))


class TestScenarios:
    """Tests pour la construction des scénarios."""

    def test_effectifs_mis_a_l_echelle(self):
        """Test max(1, round(n · facteur))."""
        spec = ScenarioSpec(desk_factor=0.1)
        assert [spec.effectif(n) for n in (1500, 200, 300, 100, 3)] == [150, 20, 30, 10, 1]

    def test_spec_invalide(self):
        """Test les valeurs refusées."""
        with pytest.raises(SelectionError):
            ScenarioSpec(kind="moyen")
        with pytest.raises(SelectionError):
            ScenarioSpec(desk_factor=0.0)

    @pytest.mark.parametrize("echantillonnage", ["random", "greedy_k"])
    def test_scenario_equilibre(self, echantillonnage):
        """Test l'entraînement équilibré et un seul jeu de test égal au reste."""
        jeu = jeu_aleatoire(12, 9)
        spec = ScenarioSpec(kind="small", sampling=echantillonnage, n_small_per_class=5)
        train, tests = build_scenario(jeu, spec, derive_stream(0, 0))
        assert train.compte_par_classe() == {"class_0": 5, "class_1": 5}
        assert len(tests) == 1
        assert tests[0].compte_par_classe() == {"class_0": 7, "class_1": 4}
        assert set(train.provenance) == {"train"}
        assert set(tests[0].provenance) == {"test"}
        assert not set(train.ids) & set(tests[0].ids)

    def test_scenario_desequilibre_facteur_0_1(self, jeu_desequilibre):
        """Test 150/20 en entraînement et trois jeux de test 30/10 disjoints."""
        spec = ScenarioSpec(kind="imbalanced", desk_factor=0.1)
        train, tests = build_scenario(jeu_desequilibre, spec, derive_stream(0, 0))
        assert train.compte_par_classe() == {"class_0": 150, "class_1": 20}
        assert len(tests) == 3
        for test in tests:
            assert test.compte_par_classe() == {"class_0": 30, "class_1": 10}
            assert not set(test.ids) & set(train.ids)
        for i in range(3):
            for j in range(i + 1, 3):
                assert not set(tests[i].ids) & set(tests[j].ids)

    def test_reste_insuffisant(self, caplog):
        """Test les tirages indépendants (avec avertissement) quand le reste est trop petit."""
        jeu = jeu_aleatoire(200, 35)
        spec = ScenarioSpec(kind="imbalanced", desk_factor=0.1)
        with caplog.at_level(logging.WARNING):
            train, tests = build_scenario(jeu, spec, derive_stream(0, 0))
        assert "AVERTISSEMENT SCENARIO" in caplog.text
        assert len(tests) == 3
        for test in tests:
            assert test.compte_par_classe() == {"class_0": 30, "class_1": 10}
            assert not set(test.ids) & set(train.ids)

    def test_corpus_trop_petit(self):
        """Test qu'un corpus plus petit que l'entraînement demandé est refusé."""
        with pytest.raises(EffectifInfaisableError):
            build_scenario(jeu_aleatoire(3, 3), ScenarioSpec(n_small_per_class=5), derive_stream(0, 0))

    def test_reproductible(self, jeu_desequilibre):
        """Test que la même graine donne les mêmes listes d'ids."""
        spec = ScenarioSpec(kind="imbalanced", desk_factor=0.1)
        a = build_scenario(jeu_desequilibre, spec, derive_stream(3, 0))
        b = build_scenario(jeu_desequilibre, spec, derive_stream(3, 0))
        assert a[0].ids == b[0].ids
        assert [t.ids for t in a[1]] == [t.ids for t in b[1]]


class TestMelange:
    """Tests pour le mélange avec des images synthétiques."""

    @staticmethod
    def synthetiques(n, taille=4):
        images = np.zeros((n, 1, taille, taille), dtype=np.float32)
        return LabeledDataset(images, [0] * n, [f"ddpm_class_1_{i:05d}" for i in range(n)], ["class_1"],
                              "synthetic-ddpm")

    def test_ajout(self):
        """Test les effectifs, les étiquettes et la provenance du jeu mixte."""
        train = jeu_aleatoire(5, 2)
        mixte = mix_with_synthetic(train, {"class_1": self.synthetiques(6)}, {"class_1": 4})
        assert mixte.compte_par_classe() == {"class_0": 5, "class_1": 6}
        assert mixte.provenance.count("synthetic-ddpm") == 4
        assert mixte.ids[-4:] == [f"ddpm_class_1_{i:05d}" for i in range(4)]

    def test_synthetiques_insuffisants(self):
        """Test qu'on ne demande pas plus d'images synthétiques que disponibles."""
        with pytest.raises(EffectifInfaisableError):
            mix_with_synthetic(jeu_aleatoire(5, 2), {"class_1": self.synthetiques(2)}, {"class_1": 4})

    def test_geometrie_differente(self):
        """Test que des images de taille différente sont refusées."""
        with pytest.raises(GeometrieIncompatibleError):
            mix_with_synthetic(jeu_aleatoire(5, 2), {"class_1": self.synthetiques(4, taille=8)}, {"class_1": 2})
