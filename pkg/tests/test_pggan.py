"""
Tests pour le GAN progressif

Objectif : vérifier le taux d'apprentissage égalisé, les pertes adverses,
la croissance des réseaux et le fondu entre résolutions.
"""

import csv
import math

import numpy as np
import pytest

from core import autodiff as ad
from core.autodiff import Tensor, no_grad
from core.layers import Module
from core.pggan import (
    Discriminateur,
    GanConfig,
    Generateur,
    LossTrace,
    ProgressiveStage,
    _suivre_moyenne,
    charger_generateur,
    echelle_egalisee,
    equalized_forward,
    gan_loss,
    generate,
    gradient_penalty,
    grow_stage,
    train_pggan,
)
from core.rng import derive_stream
from exceptions import (
    CroissanceInvalideError,
    FormeInvalideError,
    GanError,
    JeuDonneesInsuffisantError,
    ProbabiliteInvalideError,
)


class DiscriminateurLineaire(Module):
    """D(x) = w·x sur des images 4x4 aplaties; seules les deux premières composantes de w sont non nulles."""

    def __init__(self, w0, w1):
        super().__init__()
        poids = np.zeros((16, 1))
        poids[:2, 0] = [w0, w1]
        self.poids = Tensor(poids, requires_grad=True)
        self.biais = Tensor(np.zeros(1), requires_grad=True)

    def forward(self, x, alpha=1.0):
        return ad.linear(ad.flatten(x), self.poids, self.biais)


@pytest.fixture
def petite_config():
    return GanConfig(latent_dim=8, filters_below_64=8, batch_size=2, steps_per_stage=4, target_resolution=8)


class TestTauxEgalise:
    """Tests pour les couches à taux d'apprentissage égalisé."""

    def test_echelle(self):
        """Test √(2/fan_in) pour fan_in = 2 et 18."""
        assert echelle_egalisee(2) == pytest.approx(1.0)
        assert echelle_egalisee(18) == pytest.approx(1.0 / 3.0)

    def test_fan_in_nul(self):
        """Test qu'un fan_in nul est refusé."""
        with pytest.raises(FormeInvalideError):
            echelle_egalisee(0)

    def test_dense_mise_a_l_echelle(self):
        """Test que les poids effectifs sont les poids bruts multipliés par l'échelle."""
        poids = Tensor(np.ones((2, 1)))
        sortie = equalized_forward(poids, 2, Tensor([[1.0, 3.0]]))
        np.testing.assert_allclose(sortie.data, [[4.0]])

    def test_convolution_mise_a_l_echelle(self):
        """Test une convolution 3x3 à un canal: échelle 1/3 sur 9 uns."""
        poids = Tensor(np.ones((1, 2, 3, 3)))
        sortie = equalized_forward(poids, 18, Tensor(np.ones((1, 2, 3, 3))))
        assert sortie.data[0, 0, 1, 1] == pytest.approx(6.0, rel=1e-6)


class TestPertes:
    """Tests pour les pertes adverses."""

    def test_logistique_exemple(self):
        """Test L_D = 2·log(0.5) pour D(x) = D(G(z)) = 0.5."""
        l_d, l_g = gan_loss([0.5], [0.5], "logistic")
        assert l_d == pytest.approx(-1.38629, abs=1e-5)
        assert l_g == pytest.approx(math.log(0.5))

    def test_wasserstein(self):
        """Test L_D = mean(fake) − mean(real) et L_G = −mean(fake)."""
        assert gan_loss([1.0, 3.0], [0.0, 2.0], "wasserstein") == pytest.approx((-1.0, -1.0))

    @pytest.mark.parametrize("reel,faux", [([0.0], [0.5]), ([0.5], [1.0])])
    def test_probabilite_hors_bornes(self, reel, faux):
        """Test qu'une probabilité de 0 ou 1 est refusée en mode logistique."""
        with pytest.raises(ProbabiliteInvalideError):
            gan_loss(reel, faux, "logistic")

    def test_mode_inconnu(self):
        """Test qu'un mode de perte inconnu est refusé."""
        with pytest.raises(GanError):
            gan_loss([0.5], [0.5], "hinge")


class TestConfiguration:
    """Tests pour GanConfig."""

    def test_filtres(self):
        """Test la règle 128 / 64 et le remplacement par résolution."""
        assert GanConfig().filtres(32) == 128
        assert GanConfig().filtres(64) == 64
        assert GanConfig(filters_by_resolution={32: 16}).filtres(32) == 16

    @pytest.mark.parametrize("parametres", [
        {"batch_size": 1},
        {"target_resolution": 24},
        {"loss_mode": "hinge"},
        {"steps_per_stage": 1},
        {"ema_decay": 1.0},
    ])
    def test_invalide(self, parametres):
        """Test les configurations refusées."""
        with pytest.raises(GanError):
            GanConfig(**parametres)


class TestCroissance:
    """Tests pour la croissance progressive."""

    def test_formes(self, petite_config):
        """Test les formes avant et après croissance."""
        gen = Generateur(petite_config, derive_stream(0, 0))
        disc = Discriminateur(petite_config, derive_stream(0, 1))
        z = Tensor(derive_stream(0, 2).normale((2, 8)))
        with no_grad():
            assert gen(z).shape == (2, 1, 4, 4)
            assert disc(gen(z)).shape == (2, 1)
            gen, disc, stage = grow_stage(gen, disc, ProgressiveStage(4, 1.0, 4), petite_config,
                                          derive_stream(0, 3))
            images = gen(z, alpha=0.5)
            assert images.shape == (2, 1, 8, 8)
            assert disc(images, alpha=0.5).shape == (2, 1)
        assert stage == ProgressiveStage(8, 0.0, 0)
        assert np.all(np.abs(images.data) <= 1.0)

    def test_fondu_alpha_nul(self, petite_config):
        """Test qu'à α = 0 la sortie est l'ancienne résolution suréchantillonnée."""
        gen = Generateur(petite_config, derive_stream(0, 0))
        gen.grandir(derive_stream(0, 1))
        with no_grad():
            images = gen(Tensor(derive_stream(0, 2).normale((3, 8))), alpha=0.0).data
        np.testing.assert_array_equal(images[..., 0::2, 0::2], images[..., 1::2, 1::2])
        np.testing.assert_array_equal(images[..., 0::2, 0::2], images[..., 0::2, 1::2])

    def test_fondu_inacheve(self, petite_config):
        """Test qu'on ne grandit pas avant la fin du fondu."""
        gen, disc = Generateur(petite_config), Discriminateur(petite_config)
        with pytest.raises(CroissanceInvalideError):
            grow_stage(gen, disc, ProgressiveStage(4, 0.5, 2), petite_config)

    def test_au_dela_de_la_cible(self, petite_config):
        """Test qu'on ne dépasse pas la résolution cible."""
        gen, disc = Generateur(petite_config), Discriminateur(petite_config)
        gen, disc, _ = grow_stage(gen, disc, ProgressiveStage(4, 1.0, 0), petite_config)
        with pytest.raises(CroissanceInvalideError):
            grow_stage(gen, disc, ProgressiveStage(8, 1.0, 0), petite_config)

    def test_discriminateur_mauvaise_resolution(self, petite_config):
        """Test qu'une image de mauvaise résolution est refusée."""
        with pytest.raises(FormeInvalideError):
            Discriminateur(petite_config)(Tensor(np.zeros((1, 1, 8, 8))))


class TestPenalite:
    """Tests pour la pénalité de gradient."""

    def test_valeur_et_gradients(self, petite_config):
        """Test une pénalité positive et un gradient par paramètre entraînable."""
        disc = Discriminateur(petite_config, derive_stream(0, 1))
        flux = derive_stream(0, 4)
        reels = flux.normale((2, 1, 4, 4))
        faux = flux.normale((2, 1, 4, 4))
        valeur, gradients = gradient_penalty(disc, reels, faux, flux.derive(0))
        assert valeur >= 0.0
        assert set(gradients) == set(disc.parametres_entrainables())
        assert all(np.all(np.isfinite(g)) for g in gradients.values())

    def test_gradient_unitaire_penalite_nulle(self):
        """Test une pénalité et des gradients nuls quand ‖∇_x D‖ = 1 (D linéaire)."""
        disc = DiscriminateurLineaire(0.6, 0.8)
        flux = derive_stream(0, 8)
        valeur, gradients = gradient_penalty(disc, flux.normale((2, 1, 4, 4)), flux.normale((2, 1, 4, 4)),
                                             flux.derive(0))
        assert valeur < 1e-10
        assert max(float(np.max(np.abs(g))) for g in gradients.values()) < 1e-5

    def test_gradient_double(self):
        """Test λ(‖w‖ − 1)² et son gradient 2λ(‖w‖ − 1)·w/‖w‖ pour ‖w‖ = 2."""
        disc = DiscriminateurLineaire(1.2, 1.6)
        flux = derive_stream(0, 9)
        valeur, gradients = gradient_penalty(disc, flux.normale((3, 1, 4, 4)), flux.normale((3, 1, 4, 4)),
                                             flux.derive(0), lam=10.0)
        assert valeur == pytest.approx(10.0, rel=1e-5)
        attendu = np.zeros((16, 1))
        attendu[:2, 0] = [12.0, 16.0]
        np.testing.assert_allclose(gradients["poids"], attendu, atol=1e-3)
        np.testing.assert_allclose(gradients["biais"], [0.0], atol=1e-5)


class TestEntrainement:
    """Tests de l'entraînement du GAN progressif."""

    def test_trop_peu_d_images(self, petite_config):
        """Test qu'un jeu plus petit qu'un lot est refusé."""
        with pytest.raises(JeuDonneesInsuffisantError):
            train_pggan(np.zeros((1, 1, 8, 8)), petite_config, derive_stream(0, 0))

    def test_trace_csv(self, tmp_path):
        """Test l'écriture de la trace des pertes."""
        trace = LossTrace()
        trace.ajouter(0, 4, 1.0, 0.5, -0.25)
        chemin = str(tmp_path / "loss.csv")
        trace.to_csv(chemin)
        with open(chemin, encoding="utf-8") as f:
            lignes = list(csv.DictReader(f))
        assert list(lignes[0]) == ["step", "stage", "alpha", "d_loss", "g_loss"]
        assert float(lignes[0]["g_loss"]) == -0.25

    @pytest.mark.lent
    @pytest.mark.parametrize("mode", ["wasserstein", "logistic"])
    def test_entrainement_court(self, petite_config, mode):
        """Test un entraînement court jusqu'à 8x8, puis le rechargement du générateur."""
        cfg = GanConfig(latent_dim=8, filters_below_64=8, batch_size=2, steps_per_stage=4,
                        target_resolution=8, loss_mode=mode)
        images = derive_stream(0, 5).uniforme((6, 1, 8, 8), -1.0, 1.0).astype(np.float32)
        entrees, trace = train_pggan(images, cfg, derive_stream(0, 6))
        assert len(trace) == 8
        assert [l["stage"] for l in trace.lignes] == [4] * 4 + [8] * 4
        assert [l["alpha"] for l in trace.lignes[4:]] == [0.0, 0.5, 1.0, 1.0]
        assert int(entrees["meta.resolution"][0]) == 8
        gen = charger_generateur(entrees, cfg)
        echantillons = generate(gen, 3, derive_stream(0, 7))
        assert echantillons.shape == (3, 1, 8, 8)
        assert np.all(np.abs(echantillons) <= 1.0)

    def test_moyenne_mobile_des_poids(self, petite_config):
        """Test la moyenne mobile: copie au premier pas, mélange ensuite."""
        gen = Generateur(petite_config, derive_stream(0, 0))
        moyenne = {}
        _suivre_moyenne(moyenne, gen, 0.75)
        initiaux = {nom: valeur.copy() for nom, valeur in moyenne.items()}
        gen.latent.poids.data = gen.latent.poids.data + 4.0
        _suivre_moyenne(moyenne, gen, 0.75)
        np.testing.assert_allclose(moyenne["latent.poids"], initiaux["latent.poids"] + 1.0, atol=1e-6)
        np.testing.assert_array_equal(moyenne["conv_base.poids"], initiaux["conv_base.poids"])
        gen.grandir(derive_stream(0, 1))
        _suivre_moyenne(moyenne, gen, 0.75)
        np.testing.assert_array_equal(moyenne["blocs.0.conv1.poids"], gen.blocs[0].conv1.poids.data)

    @pytest.mark.lent
    def test_jeu_degenere(self):
        """Test qu'une image répétée est reproduite à 0.1 près par pixel après 2000 pas à 8x8.

        Mode Wasserstein avec moyenne mobile des poids; la perte logistique
        saturante ne converge pas sur ce jeu et n'est pas vérifiée ici.
        """
        cfg = GanConfig(latent_dim=16, filters_below_64=16, batch_size=4, steps_per_stage=2000,
                        target_resolution=8, ema_decay=0.995)
        cible = np.linspace(-0.5, 0.5, 64).reshape(1, 1, 8, 8)
        images = np.repeat(cible, 8, axis=0).astype(np.float32)
        entrees, trace = train_pggan(images, cfg, derive_stream(0, 12))
        assert len(trace) == 4000
        moyenne = generate(charger_generateur(entrees, cfg), 256, derive_stream(0, 13)).mean(axis=0)
        assert np.max(np.abs(moyenne - cible[0])) < 0.1
