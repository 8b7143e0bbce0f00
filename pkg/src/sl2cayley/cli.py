"""Command-line interface: build graphs, run analyses, verify suites.

Exit codes: 0 success, 2 configuration error, 3 analysis failure
(non-convergence or a failed verification suite), 4 size cap exceeded.
All output files embed the config hash and tool version; identical
(config, seed) pairs produce bit-identical files at any thread count.
"""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import EXIT_ANALYSIS, EXIT_CAP, EXIT_CONFIG, CapExceededError, ConfigError, ConvergenceError
from .genset import GeneratingSet, surjectivity_check
from .io import write_csv, write_summary
from .presets import DEFAULT_RANDOM_SEED, PRESET_NAMES, get_preset
from .sl2core import GroupIndex, group_order


def parse_moduli(text: str) -> tuple[int, int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        parts = parts * 3
    if len(parts) != 3:
        raise ConfigError(f"moduli must be one or three integers, got {text!r}")
    try:
        moduli = tuple(int(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"bad moduli {text!r}: {exc}") from None
    if any(q < 1 for q in moduli):
        raise ConfigError(f"moduli must be >= 1, got {moduli}")
    return moduli


def load_genset(spec: str, seed: int = DEFAULT_RANDOM_SEED) -> GeneratingSet:
    name = spec.strip().upper().replace("_", "-")
    if name in PRESET_NAMES:
        return get_preset(name, seed)
    path = Path(spec)
    if not path.exists():
        raise ConfigError(f"genset {spec!r} is neither a preset "
                          f"({', '.join(PRESET_NAMES)}) nor a readable file")
    try:
        return GeneratingSet.from_json(path.read_text())
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad generating-set file {spec!r}: {exc}") from None


def parse_l_range(text: str) -> list[int]:
    if ":" in text:
        a, b = text.split(":", 1)
        lo, hi = int(a), int(b)
        if lo < 1 or hi < lo:
            raise ConfigError(f"bad l range {text!r}")
        return list(range(lo, hi + 1))
    l = int(text)
    if l < 1:
        raise ConfigError(f"l must be >= 1, got {l}")
    return [l]


def emit(payload: dict, config: dict, out: str | None, detail_csvs=()) -> None:
    if out is None:
        from .io import jsonable
        click.echo(json.dumps(jsonable(payload), sort_keys=True, indent=2))
        return
    out_dir = Path(out)
    payload = dict(payload)
    payload["detail_files"] = [name for name, _, _ in detail_csvs]
    write_summary(out_dir / "summary.json", payload, config)
    for name, header, rows in detail_csvs:
        write_csv(out_dir / name, header, rows)


moduli_opt = click.option("--moduli", default="2,2,2", show_default=True,
                          help="component moduli q1,q2,q3 (a single q means q,q,q)")
genset_opt = click.option("--genset", default="TWISTED", show_default=True,
                          help="preset name or path to a generating-set JSON file")
seed_opt = click.option("--seed", type=int, default=None,
                        help="RNG seed (mandatory for randomized experiments)")
out_opt = click.option("--out", default=None, help="output directory")
threads_opt = click.option("--threads", type=int, default=1, show_default=True,
                           help="worker threads for the parallel kernels")


@click.group()
@click.version_option(version=__version__, prog_name="sl2cayley")
def cli():
    """Cayley graphs, walk spectra and growth analysis for SL2(Z/q) triples."""


@cli.group()
def group():
    """Group-level information."""


@group.command("info")
@moduli_opt
@genset_opt
@seed_opt
@out_opt
def group_info(moduli, genset, seed, out):
    """Orders, surjectivity and index of the generated subgroup."""
    mod = parse_moduli(moduli)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    surjective, index, sub = surjectivity_check(s, mod)
    payload = {
        "moduli": list(mod),
        "factor_orders": [group_order(q) for q in mod],
        "full_product_order": sub.full_order,
        "generators": len(s),
        "subgroup_order": sub.size,
        "surjective": surjective,
        "subgroup_index": index,
    }
    emit(payload, {"cmd": "group info", "moduli": list(mod), "genset": genset,
                   "seed": seed}, out)


@cli.group()
def cayley():
    """Cayley graph construction."""


@cayley.command("build")
@moduli_opt
@genset_opt
@seed_opt
@click.option("--out", required=True, help="output directory for edges.csv + header.json")
def cayley_build(moduli, genset, seed, out):
    """Build the Cayley multigraph and export its edge list."""
    from .cayley import build_cayley

    mod = parse_moduli(moduli)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    g = build_cayley(s, mod)
    g.export(out)
    write_summary(Path(out) / "summary.json",
                  {"moduli": list(mod), "vertices": g.size, "degree": g.degree},
                  {"cmd": "cayley build", "moduli": list(mod), "genset": genset,
                   "seed": seed})
    click.echo(f"wrote {g.size}-vertex, {g.degree}-regular graph to {out}")


@cli.group()
def spectral():
    """Walk-operator spectra."""


@spectral.command("gap")
@moduli_opt
@genset_opt
@seed_opt
@out_opt
@click.option("--mode", type=click.Choice(["auto", "dense", "iterative"]),
              default="auto", show_default=True)
def spectral_gap_cmd(moduli, genset, seed, out, mode):
    """Two-sided spectral gap on mean-zero functions."""
    from .cayley import build_cayley
    from .spectral import cheeger_bounds, spectral_gap, spectrum

    from .cayley import EXACT_CHEEGER_MAX_VERTICES, exact_cheeger

    mod = parse_moduli(moduli)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    g = build_cayley(s, mod)
    sg = spectral_gap(g, mode=mode)
    lower, upper = cheeger_bounds(g, sg)
    payload = {
        "moduli": list(mod), "vertices": g.size, "degree": g.degree,
        "mode": sg.mode, "lambda2": sg.lambda2, "lambda_min": sg.lambda_min,
        "lambda_star": sg.lambda_star, "gap": sg.gap, "bipartite": sg.bipartite,
        "cheeger_lower": lower, "cheeger_upper": upper,
        "cheeger_exact": (exact_cheeger(g)[0]
                          if 2 <= g.size <= EXACT_CHEEGER_MAX_VERTICES else None),
    }
    csvs = []
    if sg.mode == "dense":
        spec = spectrum(g, mode="dense")
        csvs.append(("eigenvalues.csv", ["index", "eigenvalue"],
                     [[i, repr(float(v))] for i, v in enumerate(spec.eigenvalues)]))
    emit(payload, {"cmd": "spectral gap", "moduli": list(mod), "genset": genset,
                   "mode": mode, "seed": seed}, out, csvs)


@cli.group()
def cheeger():
    """Cheeger constants: exact and spectral bounds."""


@cheeger.command("exact")
@moduli_opt
@genset_opt
@seed_opt
@out_opt
@threads_opt
def cheeger_exact_cmd(moduli, genset, seed, out, threads):
    """Exhaustive exact Cheeger constant (N <= 24)."""
    from .cayley import build_cayley, exact_cheeger

    mod = parse_moduli(moduli)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    g = build_cayley(s, mod)
    h, witness = exact_cheeger(g, threads=threads)
    payload = {
        "moduli": list(mod), "vertices": g.size, "degree": g.degree,
        "h": h, "h_float": float(h), "witness": [int(v) for v in witness],
    }
    emit(payload, {"cmd": "cheeger exact", "moduli": list(mod), "genset": genset,
                   "seed": seed, "threads": threads}, out)


@cheeger.command("bounds")
@moduli_opt
@genset_opt
@seed_opt
@out_opt
@click.option("--mode", type=click.Choice(["auto", "dense", "iterative"]),
              default="auto", show_default=True)
def cheeger_bounds_cmd(moduli, genset, seed, out, mode):
    """Alon-Milman bounds on the Cheeger constant from lambda2."""
    from .cayley import build_cayley
    from .spectral import cheeger_bounds, spectral_gap

    mod = parse_moduli(moduli)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    g = build_cayley(s, mod)
    sg = spectral_gap(g, mode=mode)
    lower, upper = cheeger_bounds(g, sg)
    payload = {"moduli": list(mod), "vertices": g.size, "degree": g.degree,
               "lambda2": sg.lambda2, "lower": lower, "upper": upper}
    emit(payload, {"cmd": "cheeger bounds", "moduli": list(mod),
                   "genset": genset, "mode": mode, "seed": seed}, out)


@cli.group()
def walk():
    """Exact convolution walks and non-concentration."""


@walk.command("power")
@moduli_opt
@genset_opt
@seed_opt
@out_opt
@click.option("--l", "l_text", default="6", show_default=True,
              help="convolution power (single l)")
def walk_power_cmd(moduli, genset, seed, out, l_text):
    """Exact l-fold self-convolution of chi_S; reports the l2 distance to uniform."""
    from .cayley import build_cayley
    from .walk import chi_S, l2_distance_to_uniform, power

    mod = parse_moduli(moduli)
    ls = parse_l_range(l_text)
    if len(ls) != 1:
        raise ConfigError("walk power takes a single l")
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    g = build_cayley(s, mod)
    mu = power(chi_S(s, g.group), ls[0])
    payload = {
        "moduli": list(mod), "l": ls[0], "vertices": g.size,
        "support": int(len(mu.support_positions())),
        "total_mass": mu.total(),
        "l2_distance_to_uniform": l2_distance_to_uniform(mu),
        "max_mass": Fraction(int(max(mu.nums)), mu.den),
    }
    emit(payload, {"cmd": "walk power", "moduli": list(mod), "genset": genset,
                   "l": ls[0], "seed": seed}, out)


@walk.command("decay")
@moduli_opt
@genset_opt
@seed_opt
@out_opt
@click.option("--lmax", type=int, default=12, show_default=True)
def walk_decay_cmd(moduli, genset, seed, out, lmax):
    """Distance-to-uniform vs lambda_star^l for l = 1..lmax."""
    from .walk import decay_check

    mod = parse_moduli(moduli)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    rep = decay_check(s, mod, lmax)
    payload = {
        "moduli": list(mod), "lambda_star": rep.lambda_star,
        "all_within_bound": rep.all_ok,
        "rows": [[r.l, r.distance, r.bound] for r in rep.rows],
    }
    csvs = [("decay.csv", ["l", "distance", "bound"],
             [[r.l, repr(r.distance), repr(r.bound)] for r in rep.rows])]
    emit(payload, {"cmd": "walk decay", "moduli": list(mod), "genset": genset,
                   "lmax": lmax, "seed": seed}, out, csvs)


@walk.command("nonconc-linear")
@genset_opt
@seed_opt
@out_opt
@click.option("--Q", "q_mod", type=int, required=True, help="congruence modulus Q")
@click.option("--l", "l_text", default="1:10", show_default=True,
              help="l or range lo:hi")
@click.option("--coeffs", default="1,0,0,0,0,0,0,0,0,0,0,0", show_default=True,
              help="12 integer coefficients of the primitive linear form")
def walk_nonconc_linear_cmd(genset, seed, out, q_mod, l_text, coeffs):
    """Level-set masses of chi^(l) for a primitive linear form mod Q."""
    from .walk import LinearForm, nonconcentration_sweep

    try:
        form = LinearForm(tuple(int(c) for c in coeffs.split(",")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    ls = parse_l_range(l_text)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    rows = nonconcentration_sweep(s, form, q_mod, ls)
    payload = {
        "Q": q_mod, "coeffs": list(form.coeffs),
        "all_within_bound": all(r.ok for r in rows),
        "measured_exponents": {str(r.l): r.exponent for r in rows},
        "max_masses": {str(r.l): r.max_mass for r in rows},
    }
    detail = [[r.l, r.q_mod, n, m.numerator, m.denominator, repr(float(m))]
              for r in rows for n, m in enumerate(r.profile)]
    csvs = [("nonconc.csv",
             ["l", "Q", "n", "mass_numerator", "mass_denominator", "float_value"],
             detail),
            ("nonconc_max.csv",
             ["l", "Q", "argmax_n", "mass_numerator", "mass_denominator",
              "float_value", "bound", "exponent"],
             [[r.l, r.q_mod, r.argmax_n, r.max_mass.numerator,
               r.max_mass.denominator, repr(float(r.max_mass)), repr(r.bound),
               repr(r.exponent)] for r in rows])]
    emit(payload, {"cmd": "walk nonconc-linear", "genset": genset, "Q": q_mod,
                   "l": l_text, "coeffs": coeffs, "seed": seed}, out, csvs)


@walk.command("nonconc-trace")
@genset_opt
@seed_opt
@out_opt
@click.option("--Q", "q_mod", type=int, required=True)
@click.option("--l", "l_text", default="4", show_default=True)
@click.option("--forms", "forms_path", default=None,
              help="JSON file {xi: [3 matrices], eta: [3 matrices]}; "
                   "defaults to xi_i = eta_i = [[0,1],[0,0]]")
def walk_nonconc_trace_cmd(genset, seed, out, q_mod, l_text, forms_path):
    """Mass of the trace-form level set {sum kappa_i = 0 mod Q} under chi^(l)."""
    from .cayley import build_cayley
    from .walk import TraceFormData, chi_S, mass_on_trace_form, power

    if forms_path is None:
        nil = ((0, 1), (0, 0))
        data = TraceFormData(xi=(nil, nil, nil), eta=(nil, nil, nil), q_mod=q_mod)
    else:
        try:
            doc = json.loads(Path(forms_path).read_text())
            data = TraceFormData(xi=tuple(doc["xi"]), eta=tuple(doc["eta"]),
                                 q_mod=q_mod)
        except (KeyError, ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"bad trace-form file: {exc}") from None
    ls = parse_l_range(l_text)
    s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
    g = build_cayley(s, (q_mod, q_mod, q_mod))
    chi = chi_S(s, g.group)
    rows = []
    for l in ls:
        mass = mass_on_trace_form(power(chi, l), data)
        rows.append([l, q_mod, mass.numerator, mass.denominator,
                     repr(float(mass))])
    payload = {"Q": q_mod, "masses": {str(r[0]): Fraction(r[2], r[3]) for r in rows}}
    csvs = [("trace_mass.csv", ["l", "Q", "mass_numerator", "mass_denominator",
                                "float_value"], rows)]
    emit(payload, {"cmd": "walk nonconc-trace", "genset": genset, "Q": q_mod,
                   "l": l_text, "seed": seed}, out, csvs)


@cli.group()
def growth():
    """Product-set growth and covering searches."""


@growth.command("exponent")
@moduli_opt
@genset_opt
@click.option("--seed", type=int, default=None,
              help="seed for a random symmetric subset (or use --subset)")
@click.option("--subset", "subset_path", default=None,
              help="CSV of subset positions (sorted index list)")
@out_opt
@click.option("--size", type=int, default=200, show_default=True,
              help="target sample size before symmetrization")
@click.option("--delta", type=float, default=None)
@click.option("--epsilon", type=float, default=None)
@click.option("--l", "l_text", default="4", show_default=True)
def growth_exponent_cmd(moduli, genset, seed, subset_path, out, size, delta,
                        epsilon, l_text):
    """Growth exponent of a symmetric subset (seeded random or from CSV)."""
    from .growth import GroupSubset, growth_exponent, load_subset_csv, save_subset_csv
    from .walk import chi_S, power

    mod = parse_moduli(moduli)
    group = GroupIndex.full_product(mod)
    if subset_path is not None:
        a = load_subset_csv(group, subset_path)
    else:
        if seed is None:
            raise ConfigError("random subsets need --seed (or pass --subset FILE)")
        if size < 1 or size > group.size:
            raise ConfigError(f"size must lie in [1, {group.size}]")
        rng = np.random.default_rng(seed)
        pos = rng.choice(group.size, size=size, replace=False)
        pos = np.union1d(pos,
                         group.inverse_positions(np.asarray(pos, dtype=np.int64)))
        a = GroupSubset.from_positions(group, pos)
    chi_power = None
    if delta is not None:
        s = load_genset(genset, seed if seed is not None else DEFAULT_RANDOM_SEED)
        ls = parse_l_range(l_text)
        chi_power = power(chi_S(s, group), ls[0])
    rep = growth_exponent(a, chi_power=chi_power, delta=delta, epsilon=epsilon)
    payload = {
        "moduli": list(mod), "size_a": rep.size_a, "size_aaa": rep.size_aaa,
        "exponent": rep.exponent, "hypothesis_flags": rep.hypothesis_flags,
    }
    cfg = {"cmd": "growth exponent", "moduli": list(mod), "seed": seed,
           "subset": subset_path, "size": size, "delta": delta,
           "epsilon": epsilon}
    emit(payload, cfg, out)
    if out is not None:
        save_subset_csv(a, Path(out) / "subset.csv")


@growth.command("bounded-gen")
@moduli_opt
@click.option("--seed", type=int, required=True)
@out_opt
@click.option("--density", type=float, default=0.92, show_default=True,
              help="fraction of the group sampled before symmetrization")
@click.option("--kmax", type=int, default=6, show_default=True)
def growth_bounded_gen_cmd(moduli, seed, out, density, kmax):
    """Bounded-generation search on a seeded dense symmetric subset."""
    from .growth import GroupSubset, bounded_generation_search

    mod = parse_moduli(moduli)
    if not 0 < density <= 1:
        raise ConfigError("density must lie in (0, 1]")
    group = GroupIndex.full_product(mod)
    rng = np.random.default_rng(seed)
    size = max(1, int(density * group.size))
    pos = rng.choice(group.size, size=size, replace=False)
    pos = np.union1d(pos, group.inverse_positions(np.asarray(pos, dtype=np.int64)))
    a = GroupSubset.from_positions(group, pos)
    res = bounded_generation_search(a, k_max=kmax)
    payload = {
        "moduli": list(mod), "subset_size": a.size, "found": res.found,
        "k_star": res.k_star, "q_prime": list(res.q_prime) if res.q_prime else None,
        "stabilized_at": res.stabilized_at,
        "best_covered": list(res.best_covered) if res.best_covered else None,
        "identity_adjoined": res.identity_adjoined,
        "densities": res.densities,
    }
    emit(payload, {"cmd": "growth bounded-gen", "moduli": list(mod),
                   "seed": seed, "density": density, "kmax": kmax}, out)


@growth.command("sumset-cover")
@moduli_opt
@click.option("--seed", type=int, required=True)
@out_opt
@click.option("--density", type=float, default=0.5, show_default=True)
@click.option("--mmax", type=int, default=8, show_default=True)
def growth_sumset_cover_cmd(moduli, seed, out, density, mmax):
    """Sumset covering search for seeded random residue triple sets."""
    from .growth import ResidueTripleSet, sumset_cover

    mod = parse_moduli(moduli)
    rng = np.random.default_rng(seed)
    total = mod[0] * mod[1] * mod[2]
    size = max(1, int(density * total))

    def sample():
        flat = rng.choice(total, size=size, replace=False)
        mask = np.zeros(total, dtype=bool)
        mask[flat] = True
        return ResidueTripleSet(mod, mask.reshape(tuple(mod)))

    a, b = sample(), sample()
    res = sumset_cover(a, b, m_max=mmax)
    payload = {
        "moduli": list(mod), "size_a": a.size, "size_b": b.size,
        "found": res.found, "m_star": res.k_star,
        "q_prime": list(res.q_prime) if res.q_prime else None,
        "stabilized_at": res.stabilized_at,
        "best_covered": list(res.best_covered) if res.best_covered else None,
    }
    emit(payload, {"cmd": "growth sumset-cover", "moduli": list(mod),
                   "seed": seed, "density": density, "mmax": mmax}, out)


@cli.group()
def glue():
    """Approximate-homomorphism analysis."""


def _glue_groups(moduli, genset, target_moduli, target_genset, seed):
    from .genset import generated_subgroup

    s1 = load_genset(genset, seed)
    g1 = generated_subgroup(s1, parse_moduli(moduli))
    s2 = load_genset(target_genset, seed)
    g2 = generated_subgroup(s2, parse_moduli(target_moduli))
    labels = s1.reduced_labels(g1.moduli)
    gen_pos = np.unique(g1.positions_of_enc(g1.encode_labels(labels)))
    return g1, g2, gen_pos


@glue.command("failures")
@click.option("--moduli", default="2,2,2", show_default=True)
@click.option("--genset", default="DIAGONAL", show_default=True)
@click.option("--target-moduli", default="2,2,2", show_default=True)
@click.option("--target-genset", default="DIAGONAL", show_default=True)
@click.option("--psi", "psi_path", required=True,
              help="CSV table (source_index, target_index)")
@seed_opt
@out_opt
@threads_opt
def glue_failures_cmd(moduli, genset, target_moduli, target_genset, psi_path,
                      seed, out, threads):
    """Exact multiplicativity failure count for a map table."""
    from .glue import MapTable, multiplicativity_failures

    g1, g2, _ = _glue_groups(moduli, genset, target_moduli, target_genset,
                             seed if seed is not None else DEFAULT_RANDOM_SEED)
    psi = MapTable.from_csv(g1, g2, psi_path)
    count, ratio = multiplicativity_failures(psi, threads=threads)
    payload = {"g1_order": g1.size, "g2_order": g2.size,
               "failures": count, "failure_ratio": ratio}
    emit(payload, {"cmd": "glue failures", "moduli": moduli, "psi": psi_path,
                   "seed": seed}, out)


@glue.command("dichotomy")
@click.option("--moduli", default="2,2,2", show_default=True)
@click.option("--genset", default="DIAGONAL", show_default=True)
@click.option("--target-moduli", default="2,2,2", show_default=True)
@click.option("--target-genset", default="DIAGONAL", show_default=True)
@click.option("--psi", "psi_path", default=None,
              help="CSV map table; omitted = seeded random table")
@click.option("--epsilon", type=float, default=1e-4, show_default=True)
@seed_opt
@out_opt
@threads_opt
def glue_dichotomy_cmd(moduli, genset, target_moduli, target_genset, psi_path,
                       epsilon, seed, out, threads):
    """Far-from-multiplicative vs homomorphism-recovery dichotomy."""
    from .glue import MapTable, dichotomy_test

    g1, g2, gen_pos = _glue_groups(moduli, genset, target_moduli, target_genset,
                                   seed if seed is not None else DEFAULT_RANDOM_SEED)
    if psi_path is not None:
        psi = MapTable.from_csv(g1, g2, psi_path)
    else:
        if seed is None:
            raise ConfigError("random psi needs --seed")
        rng = np.random.default_rng(seed)
        psi = MapTable(g1, g2, rng.integers(0, g2.size, size=g1.size))
    res = dichotomy_test(psi, epsilon, gen_pos, threads=threads)
    payload = {
        "case": res.case, "failures": res.failures,
        "failure_ratio": res.failure_ratio, "agreement": res.agreement,
        "agreement_set": (res.agreement_set.tolist()
                          if res.agreement_set is not None else None),
        "hom_generator_images": (list(res.hom_gen_images)
                                 if res.hom_gen_images else None),
    }
    emit(payload, {"cmd": "glue dichotomy", "moduli": moduli,
                   "epsilon": epsilon, "seed": seed, "psi": psi_path}, out)


@glue.command("commutator-cover")
@click.option("--v", "v_text", required=True, help="x,y,z coordinates")
@click.option("--w", "w_text", required=True, help="x,y,z coordinates")
@click.option("--q", type=int, required=True)
@out_opt
def glue_commutator_cmd(v_text, w_text, q, out):
    """Check [v, V] + [w, V] contains 2V mod q."""
    from .glue import LieVector, commutator_cover_check

    def parse_vec(t):
        parts = [int(x) for x in t.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"need 3 coordinates, got {t!r}")
        return LieVector(*parts)

    try:
        ok, cert = commutator_cover_check(parse_vec(v_text), parse_vec(w_text), q)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    payload = {"covers": ok, **cert}
    emit(payload, {"cmd": "glue commutator-cover", "v": v_text, "w": w_text,
                   "q": q}, out)


@cli.command("verify")
@click.argument("suite")
@out_opt
@threads_opt
def verify_cmd(suite, out, threads):
    """Run a registered verification suite; exit 0 iff all criteria pass."""
    from .verify import SUITE_NAMES, run_suite

    if suite not in SUITE_NAMES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITE_NAMES}")
    results = run_suite(suite, threads=threads)
    all_ok = all(r.passed for r in results)
    for r in results:
        click.echo(r.line())
    if out is not None:
        write_summary(Path(out) / "verify.json",
                      {"suite": suite,
                       "results": [{"name": r.name, "passed": r.passed,
                                    "detail": r.detail, "data": r.data}
                                   for r in results],
                       "all_passed": all_ok},
                      {"cmd": "verify", "suite": suite, "threads": threads})
    if not all_ok:
        raise click.exceptions.Exit(EXIT_ANALYSIS)


ANALYSES = ("spectral", "walk", "growth", "glue")


@cli.command("run")
@click.option("--config", "config_path", required=True,
              help="experiment config JSON")
@threads_opt
def run_cmd(config_path, threads):
    """Run an experiment described by a JSON config file."""
    try:
        cfg = json.loads(Path(config_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"unreadable config {config_path!r}: {exc}") from None
    run_experiment(cfg, threads=threads)


def _config_moduli_list(cfg) -> list[tuple[int, int, int]]:
    if "q_range" in cfg:
        lo, hi = cfg["q_range"]
        if lo < 1 or hi < lo:
            raise ConfigError(f"bad q_range {cfg['q_range']}")
        return [(q, q, q) for q in range(lo, hi + 1)]
    moduli = cfg.get("moduli")
    if moduli is None:
        raise ConfigError("config needs 'moduli' or 'q_range'")
    if isinstance(moduli[0], (list, tuple)):
        out = [tuple(int(x) for x in m) for m in moduli]
    else:
        out = [tuple(int(x) for x in moduli)]
    for m in out:
        if len(m) != 3 or any(q < 1 for q in m):
            raise ConfigError(f"bad moduli entry {m}")
    return out


def run_experiment(cfg: dict, threads: int = 1) -> None:
    """Validate fully, then run; no partial files on config errors."""
    analysis = cfg.get("analysis")
    if analysis not in ANALYSES:
        raise ConfigError(f"analysis must be one of {ANALYSES}, got {analysis!r}")
    out = cfg.get("out")
    if not out:
        raise ConfigError("config needs an 'out' directory")
    moduli_list = _config_moduli_list(cfg)
    genset_name = cfg.get("genset", "TWISTED")
    seed = cfg.get("seed")
    params = cfg.get("params", {})
    randomized = analysis in ("growth", "glue") or genset_name.upper().replace(
        "_", "-") == "DENSE-RANDOM"
    if randomized and seed is None:
        raise ConfigError(f"analysis {analysis!r} is randomized: 'seed' is mandatory")
    s = load_genset(genset_name, seed if seed is not None else DEFAULT_RANDOM_SEED)

    if analysis == "spectral":
        from .cayley import build_cayley, exact_cheeger
        from .spectral import cheeger_bounds, spectral_gap

        rows = []
        for mod in moduli_list:
            g = build_cayley(s, mod)
            sg = spectral_gap(g, mode=params.get("mode", "auto"))
            lower, upper = cheeger_bounds(g, sg)
            row = [mod[0], mod[1], mod[2], g.size, repr(sg.lambda2),
                   repr(sg.lambda_min), repr(sg.gap), repr(lower), repr(upper)]
            if g.size <= 24:
                h, _ = exact_cheeger(g, threads=threads)
                row.append(f"{h.numerator}/{h.denominator}")
            else:
                row.append("")
            rows.append(row)
        write_csv(Path(out) / "spectral.csv",
                  ["q1", "q2", "q3", "N", "lambda2", "lambda_min", "gap",
                   "h_lower", "h_upper", "h_exact"], rows)
        write_summary(Path(out) / "summary.json",
                      {"analysis": "spectral", "rows": len(rows)}, cfg)
    elif analysis == "walk":
        from .walk import LinearForm, nonconcentration_sweep

        q_mod = int(params.get("Q", 5))
        ls = params.get("l", list(range(1, 11)))
        coeffs = tuple(params.get("coeffs", (1,) + (0,) * 11))
        form = LinearForm(coeffs)
        rows = nonconcentration_sweep(s, form, q_mod, ls)
        write_csv(Path(out) / "walk.csv",
                  ["l", "Q", "n", "mass_numerator", "mass_denominator",
                   "float_value"],
                  [[r.l, r.q_mod, n, m.numerator, m.denominator,
                    repr(float(m))] for r in rows
                   for n, m in enumerate(r.profile)])
        write_summary(Path(out) / "summary.json",
                      {"analysis": "walk", "Q": q_mod,
                       "measured_exponents": {str(r.l): r.exponent for r in rows},
                       "all_within_bound": all(r.ok for r in rows)}, cfg)
    elif analysis == "growth":
        from .growth import GroupSubset, growth_exponent

        rng = np.random.default_rng(seed)
        rows = []
        for mod in moduli_list:
            group = GroupIndex.full_product(mod)
            lo = int(params.get("min_size", max(2, int(group.size**0.5))))
            hi = int(params.get("max_size", max(lo + 1, int(group.size**0.7))))
            for trial in range(int(params.get("trials", 5))):
                pos = rng.choice(group.size,
                                 size=int(rng.integers(lo, hi)), replace=False)
                pos = np.union1d(pos, group.inverse_positions(
                    np.asarray(pos, dtype=np.int64)))
                rep = growth_exponent(GroupSubset.from_positions(group, pos))
                rows.append([mod[0], mod[1], mod[2], trial, rep.size_a,
                             rep.size_aaa, repr(rep.exponent)])
        write_csv(Path(out) / "growth.csv",
                  ["q1", "q2", "q3", "trial", "size_a", "size_aaa", "exponent"],
                  rows)
        write_summary(Path(out) / "summary.json",
                      {"analysis": "growth", "rows": len(rows)}, cfg)
    else:  # glue
        from .genset import generated_subgroup
        from .glue import MapTable, dichotomy_test

        rng = np.random.default_rng(seed)
        epsilon = float(params.get("epsilon", 1e-4))
        rows = []
        for mod in moduli_list:
            g1 = generated_subgroup(s, mod)
            labels = s.reduced_labels(mod)
            gen_pos = np.unique(g1.positions_of_enc(g1.encode_labels(labels)))
            for trial in range(int(params.get("trials", 10))):
                psi = MapTable(g1, g1, rng.integers(0, g1.size, size=g1.size))
                res = dichotomy_test(psi, epsilon, gen_pos, threads=threads)
                rows.append([mod[0], mod[1], mod[2], trial, res.case,
                             res.failures])
        write_csv(Path(out) / "glue.csv",
                  ["q1", "q2", "q3", "trial", "case", "failures"], rows)
        write_summary(Path(out) / "summary.json",
                      {"analysis": "glue",
                       "violations": sum(1 for r in rows
                                         if r[4] == "violation-candidate")},
                      cfg)


def main():
    try:
        cli(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except CapExceededError as exc:
        click.echo(f"cap exceeded: {exc}", err=True)
        sys.exit(EXIT_CAP)
    except ConvergenceError as exc:
        click.echo(f"analysis failure: {exc}", err=True)
        sys.exit(EXIT_ANALYSIS)
    except click.exceptions.Abort:
        sys.exit(130)


if __name__ == "__main__":
    main()
