"""Adversarially trained Markov transition kernels.

A conditional generator G(x, xi) doubles as the transition operator of
a Markov chain. Each outer training iteration: (1) adjust the current
generated batch toward the target with the configured source (the
gradient-free particle update by default, a gradient sampler or a data
file otherwise), (2) take several discriminator steps and one generator
step on the GAN objective with a proximity regularizer that keeps
outputs near their inputs, (3) roll the particle buffer forward through
the generator. After training only G is kept; sampling is forward
passes, optionally filtered by a Metropolis-style accept/reject.

The accept/reject treats the generator proposal as approximately
symmetric: acceptance is min(1, p(x') / p(x)). The proposal density is
intractable, so the filtered chain is NOT exactly invariant for the
target; expect very low acceptance rates on peaked posteriors.
"""

import json
import os
import time

import numpy as np

from . import autodiff as ad
from .diagnostics import mmd
from .errors import DivergenceError, ValidationError
from .kernels import KernelConfig
from .nets import MLP, RMSProp
from .rng import RngStream
from .samplers.ag_svgd import ag_svgd_step
from .samplers.base import BaseSampler, check_particles, check_target
from .samplers.sgld import sgld_step
from .samplers.svgd import svgd_step
from .transport import W2Config, entropic_w2

_SOURCES = ("self_learning", "sgld", "svgd", "dataset")
# discriminator outputs are clamped this far from {0, 1} before any log
_D_EPS = 1e-7


def default_width(dim):
    return 128 if dim <= 10 else 256


def build_generator(dim, noise_dim, width, rng):
    return MLP([dim + noise_dim, width, width, dim], ["tanh", "tanh", "linear"], rng)


def build_discriminator(dim, width, rng):
    return MLP([dim, width, width, 1], ["tanh", "tanh", "sigmoid"], rng)


def _clamped(t):
    return t.clip(_D_EPS, 1.0 - _D_EPS)


def disc_loss_graph(discriminator, real, fake):
    """-(mean log D(real) + mean log(1 - D(fake))); fake enters as data."""
    d_real = _clamped(discriminator(ad.constant(real)))
    d_fake = _clamped(discriminator(ad.constant(fake)))
    return -(d_real.log().mean() + (1.0 - d_fake).log().mean())


def gen_loss_graph(generator, discriminator, gen_inputs, noise, w2cfg):
    """mean log(1 - D(G(x, xi))) + strength * transport penalty.

    `gen_inputs` enters as a constant, so no gradient flows back into
    the buffer that produced it.
    """
    inputs = ad.constant(np.concatenate([gen_inputs, noise], axis=1))
    outputs = generator(inputs)
    d_fake = _clamped(discriminator(outputs))
    loss = (1.0 - d_fake).log().mean()
    if w2cfg.strength > 0:
        loss = loss + entropic_w2(outputs, gen_inputs, w2cfg) * w2cfg.strength
    return loss, outputs


def gan_losses(real, gen_inputs, noise, generator, discriminator,
               w2cfg=W2Config()):
    """Both adversarial losses for one batch, as graph tensors.

    The discriminator loss sees the generator outputs as data; the
    generator loss owns the full graph through G and D.
    """
    if real.shape[0] != gen_inputs.shape[0]:
        raise ValidationError("real and generator batches differ in size")
    fake = generator.predict(np.concatenate([gen_inputs, noise], axis=1))
    d_loss = disc_loss_graph(discriminator, real, fake)
    g_loss, _ = gen_loss_graph(generator, discriminator, gen_inputs, noise, w2cfg)
    return d_loss, g_loss


def sample_chains(generator, x0, steps, noise_var, rng, mh_target=None):
    """Roll `steps` transitions for a (C, d) batch of chains.

    Returns (chains of shape (C, steps, d), acceptance rate or None).
    With `mh_target` each proposal is kept with probability
    min(1, p(x') / p(x)); rejections repeat the previous state.
    """
    x = np.atleast_2d(np.asarray(x0, dtype=np.float64)).copy()
    c, d = x.shape
    noise_dim = generator.sizes[0] - d
    sigma = np.sqrt(noise_var)
    out = np.empty((c, steps, d))
    accepted = 0
    if mh_target is not None:
        log_p = mh_target.log_unnorm(x)
        log_p = np.atleast_1d(log_p)
    for step in range(steps):
        xi = sigma * rng.standard_normal(size=(c, noise_dim))
        prop = generator.predict(np.concatenate([x, xi], axis=1))
        if mh_target is None:
            x = prop
        else:
            log_p_prop = np.atleast_1d(mh_target.log_unnorm(prop))
            u = rng.uniform(size=c)
            accept = np.log(u) < log_p_prop - log_p
            x = np.where(accept[:, None], prop, x)
            log_p = np.where(accept, log_p_prop, log_p)
            accepted += int(accept.sum())
        out[:, step] = x
    rate = accepted / (c * steps) if mh_target is not None else None
    return out, rate


def sample_chain(generator, x0, steps, noise_var, rng, mh_target=None):
    """Single chain of `steps` states starting from (but excluding) x0."""
    chains, _ = sample_chains(
        generator, np.asarray(x0, dtype=np.float64)[None, :], steps,
        noise_var, rng, mh_target,
    )
    return chains[0]


def acceptance_ratio_trace(chain, target, ceiling=None):
    """Density ratios p(x_{t+1}) / p(x_t) along a chain, clipped at
    `ceiling` for plotting."""
    x = np.asarray(chain, dtype=np.float64)
    log_p = target.log_unnorm(x)
    ratios = np.exp(np.diff(log_p))
    if ceiling is not None:
        ratios = np.minimum(ratios, ceiling)
    return ratios


def save_generator(path, generator, noise_var, dim, config=None):
    doc = {
        "format": 1,
        "dim": dim,
        "noise_dim": generator.sizes[0] - dim,
        "noise_var": noise_var,
        "generator": generator.to_dict(),
        "config": config or {},
    }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)


def load_generator(path):
    """Returns (generator MLP, metadata dict)."""
    with open(path) as fh:
        doc = json.load(fh)
    for key in ("format", "dim", "noise_var", "generator"):
        if key not in doc:
            raise ValidationError(f"model file missing key {key!r}")
    if doc["format"] != 1:
        raise ValidationError(f"unsupported model format {doc['format']}")
    return MLP.from_dict(doc["generator"]), doc


class SALMC(BaseSampler):
    """Trainer for the generator-as-transition-kernel sampler.

    `source` picks how real batches are produced each outer iteration:
    "self_learning" adjusts the buffer with the gradient-free particle
    update (needs only target.log_unnorm), "sgld"/"svgd" use gradient
    samplers, "dataset" draws rows from an array passed to fit. The
    source-specific knobs travel in `source_params`.
    """

    def __init__(self, source="self_learning", source_params=None,
                 n_outer=500, batch_size=100, disc_steps=3, roll_steps=3,
                 noise_var=5.0, noise_dim=None, width=None,
                 lr_gen=1e-4, lr_disc=1e-4,
                 w2_balance=0.1, w2_step=1.0, w2_temperature=None,
                 w2_prefactor=None,
                 mmd_every=25, mmd_reference_size=1000,
                 divergence_threshold=1e6, seed=0):
        self.source = source
        self.source_params = source_params
        self.n_outer = n_outer
        self.batch_size = batch_size
        self.disc_steps = disc_steps
        self.roll_steps = roll_steps
        self.noise_var = noise_var
        self.noise_dim = noise_dim
        self.width = width
        self.lr_gen = lr_gen
        self.lr_disc = lr_disc
        self.w2_balance = w2_balance
        self.w2_step = w2_step
        self.w2_temperature = w2_temperature
        self.w2_prefactor = w2_prefactor
        self.mmd_every = mmd_every
        self.mmd_reference_size = mmd_reference_size
        self.divergence_threshold = divergence_threshold
        self.seed = seed

    # -- real-batch sources ------------------------------------------------

    def _validate(self, target, dataset):
        if self.source not in _SOURCES:
            raise ValidationError(
                f"unknown source {self.source!r}, expected one of {_SOURCES}"
            )
        if self.batch_size < 2:
            raise ValidationError("batch_size must be at least 2")
        if self.disc_steps < 1:
            raise ValidationError("disc_steps must be at least 1")
        if self.roll_steps < 0:
            raise ValidationError("roll_steps must be non-negative")
        if self.source == "dataset":
            if dataset is None:
                raise ValidationError("source 'dataset' needs a dataset array")
        elif target is None:
            raise ValidationError(f"source {self.source!r} needs a target")
        else:
            check_target(target, needs_grad=self.source in ("sgld", "svgd"))

    def _adjust(self, x, target, rng):
        p = dict(self.source_params or {})
        n_steps = p.pop("n_steps", 1)
        if self.source == "self_learning":
            kw = {
                "kernel": p.get("kernel", KernelConfig("median")),
                "est_kernel": p.get("est_kernel", KernelConfig("median")),
                "eta": p.get("eta", 1.0),
                "clip_quantile": p.get("clip_quantile", None),
            }
            eps = p.get("step_size", 0.1)
            for _ in range(n_steps):
                x = ag_svgd_step(x, target, eps, **kw)
            return x
        if self.source == "sgld":
            eps = p.get("step_size", 0.01)
            for _ in range(n_steps):
                x = sgld_step(x, target, eps, rng=rng)
            return x
        if self.source == "svgd":
            eps = p.get("step_size", 0.1)
            kernel = p.get("kernel", KernelConfig("median"))
            for _ in range(n_steps):
                x = svgd_step(x, target, eps, kernel)
            return x
        idx = rng.integers(0, self._dataset.shape[0], size=x.shape[0])
        return self._dataset[idx]

    # -- training ----------------------------------------------------------

    def fit(self, target=None, dataset=None):
        self._validate(target, dataset)
        if dataset is not None:
            self._dataset = np.atleast_2d(np.asarray(dataset, dtype=np.float64))
            dim = self._dataset.shape[1]
        else:
            dim = target.dim
        noise_dim = self.noise_dim or dim
        width = self.width or default_width(dim)
        init_rng, noise_rng, source_rng, ref_rng = self._stream().spawn(4)

        gen = build_generator(dim, noise_dim, width, init_rng)
        disc = build_discriminator(dim, width, init_rng)
        opt_g = RMSProp(gen.parameters(), lr=self.lr_gen)
        opt_d = RMSProp(disc.parameters(), lr=self.lr_disc)
        sigma = np.sqrt(self.noise_var)
        m = self.batch_size
        # the closed-form regularizer sums over all M^2 pairs; for uniform
        # marginals the merged dual constant scales as 1/M^2, which keeps
        # the proximity term on the same footing as the adversarial term
        prefactor = self.w2_prefactor
        if prefactor is None:
            prefactor = 1.0 / (m * m)
        w2cfg = W2Config(temperature=self.w2_temperature, prefactor=prefactor,
                         balance=self.w2_balance, proximal_step=self.w2_step)

        reference = None
        if target is not None and target.has_reference_sampler and self.mmd_every:
            reference = target.reference_sample(self.mmd_reference_size, ref_rng)

        x_buf = init_rng.standard_normal(size=(m, dim))
        trace = {"d_loss": [], "g_loss": [], "acceptance": [], "mmd": []}
        if reference is not None:
            # iteration 0 = the untrained buffer, before any update
            trace["mmd"].append([0, mmd(x_buf, reference)])

        def fresh_noise():
            return sigma * noise_rng.standard_normal(size=(m, noise_dim))

        def g_apply(x):
            return gen.predict(np.concatenate([x, fresh_noise()], axis=1))

        for it in range(self.n_outer):
            real = self._adjust(x_buf, target, source_rng)

            for _ in range(self.disc_steps):
                fake = g_apply(x_buf)
                d_loss = disc_loss_graph(disc, real, fake)
                d_loss.backward()
                opt_d.step()
                opt_d.zero_grad()

            g_loss, _ = gen_loss_graph(gen, disc, x_buf, fresh_noise(), w2cfg)
            g_loss.backward()
            opt_g.step()
            opt_g.zero_grad()
            opt_d.zero_grad()

            d_val = float(d_loss.data)
            g_val = float(g_loss.data)
            if abs(d_val) > self.divergence_threshold or abs(g_val) > self.divergence_threshold:
                raise DivergenceError(
                    f"loss diverged at outer iteration {it}: "
                    f"d_loss={d_val:.3e} g_loss={g_val:.3e}, "
                    f"recent d={trace['d_loss'][-5:]}, g={trace['g_loss'][-5:]}, "
                    f"buffer max |x|={np.max(np.abs(x_buf)):.3e}"
                )
            trace["d_loss"].append(d_val)
            trace["g_loss"].append(g_val)

            rolled = g_apply(x_buf)
            if target is not None:
                delta = target.log_unnorm(rolled) - target.log_unnorm(x_buf)
                # mean of min(1, p(x') / p(x)), computed in log space
                trace["acceptance"].append(
                    float(np.mean(np.exp(np.minimum(delta, 0.0))))
                )
            x_buf = rolled
            for _ in range(self.roll_steps):
                x_buf = g_apply(x_buf)

            if reference is not None and (it + 1) % self.mmd_every == 0:
                trace["mmd"].append([it + 1, mmd(x_buf, reference)])

        self.generator_ = gen
        self.discriminator_ = disc
        self.trace_ = trace
        self.buffer_ = x_buf
        self.dim_ = dim
        self.noise_dim_ = noise_dim
        self._target = target
        return self

    # -- sampling ----------------------------------------------------------

    def sample(self, n_chains=1, steps=1000, seed=None, mh=False, x0=None):
        """Post-training chains of shape (n_chains, steps, dim).

        Also stores `last_acceptance_` and `last_sampling_seconds_`.
        """
        if not hasattr(self, "generator_"):
            raise ValidationError("sample() called before fit()")
        if mh and self._target is None:
            raise ValidationError("mh filtering needs a target")
        rng = RngStream(self.seed if seed is None else seed)
        if x0 is None:
            x0 = rng.standard_normal(size=(n_chains, self.dim_))
        else:
            x0 = check_particles(x0, self.dim_, "x0")
        t0 = time.perf_counter()
        chains, rate = sample_chains(
            self.generator_, x0, steps, self.noise_var, rng,
            mh_target=self._target if mh else None,
        )
        self.last_sampling_seconds_ = time.perf_counter() - t0
        self.last_acceptance_ = rate
        return chains

    def save(self, path):
        params = {}
        for key, value in self.get_params().items():
            try:
                json.dumps(value)
                params[key] = value
            except TypeError:
                params[key] = repr(value)
        save_generator(path, self.generator_, self.noise_var, self.dim_, params)
