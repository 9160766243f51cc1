"""Compiled inner loops for the planar rod model.

All kernels work on flat arrays so one code path serves a single fiber and a
whole bonded network:

- ``pos``/``vel``: (n, 2) node state
- ``inv_mass``: (n,) inverse lumped mass
- ``free``: (n, 2) 1.0 for a free degree of freedom, 0.0 for a fixed one
- elements ``e_i, e_j, e_rest, e_ea``: axial springs with stiffness EA/l0
- bends ``b_a, b_b, b_c, b_coef``: turning-angle hinges, energy 0.5*coef*phi**2
  with coef = EI / voronoi_length
- couplings ``c_a, c_b, c_k, c_c``: bonded node pairs (spring k, damper c)
- loads ``t_node, t_force, t_k, t_anchor``: end loads, force = t_force - t_k*(x - t_anchor)
- actuation ``act_node, act_dir``: point force of magnitude ``fmag`` along ``act_dir``

Status codes returned by the stepping kernels: ``STATUS_OK`` (-1),
``STATUS_NONFINITE`` (-2), or the index (>= 0) of a degenerate element.
"""
import math

import numpy as np
from numba import njit

MIN_ELEMENT_LENGTH = 1.0e-9
STATUS_OK = -1
STATUS_NONFINITE = -2


@njit(cache=True)
def accumulate_stretch(pos, e_i, e_j, e_rest, e_ea, out):
    for k in range(e_i.shape[0]):
        i = e_i[k]
        j = e_j[k]
        dx = pos[j, 0] - pos[i, 0]
        dy = pos[j, 1] - pos[i, 1]
        length = math.sqrt(dx * dx + dy * dy)
        if length < MIN_ELEMENT_LENGTH:
            return k
        f = e_ea[k] * (length - e_rest[k]) / (e_rest[k] * length)
        out[i, 0] += f * dx
        out[i, 1] += f * dy
        out[j, 0] -= f * dx
        out[j, 1] -= f * dy
    return STATUS_OK


@njit(cache=True)
def accumulate_bend(pos, b_a, b_b, b_c, b_coef, out):
    for k in range(b_a.shape[0]):
        a = b_a[k]
        b = b_b[k]
        c = b_c[k]
        e1x = pos[b, 0] - pos[a, 0]
        e1y = pos[b, 1] - pos[a, 1]
        e2x = pos[c, 0] - pos[b, 0]
        e2y = pos[c, 1] - pos[b, 1]
        l1sq = e1x * e1x + e1y * e1y
        l2sq = e2x * e2x + e2y * e2y
        phi = math.atan2(e1x * e2y - e1y * e2x, e1x * e2x + e1y * e2y)
        moment = b_coef[k] * phi
        # d(phi)/d(x_a) = perp(e1)/|e1|^2, d(phi)/d(x_c) = perp(e2)/|e2|^2
        gax = -e1y / l1sq
        gay = e1x / l1sq
        gcx = -e2y / l2sq
        gcy = e2x / l2sq
        out[a, 0] -= moment * gax
        out[a, 1] -= moment * gay
        out[c, 0] -= moment * gcx
        out[c, 1] -= moment * gcy
        out[b, 0] += moment * (gax + gcx)
        out[b, 1] += moment * (gay + gcy)


@njit(cache=True)
def accumulate_coupling_springs(pos, c_a, c_b, c_k, out):
    for k in range(c_a.shape[0]):
        a = c_a[k]
        b = c_b[k]
        fx = c_k[k] * (pos[b, 0] - pos[a, 0])
        fy = c_k[k] * (pos[b, 1] - pos[a, 1])
        out[a, 0] += fx
        out[a, 1] += fy
        out[b, 0] -= fx
        out[b, 1] -= fy


@njit(cache=True)
def accumulate_loads(pos, t_node, t_force, t_k, t_anchor, out):
    for k in range(t_node.shape[0]):
        i = t_node[k]
        out[i, 0] += t_force[k, 0] - t_k[k] * (pos[i, 0] - t_anchor[k, 0])
        out[i, 1] += t_force[k, 1] - t_k[k] * (pos[i, 1] - t_anchor[k, 1])


@njit(cache=True)
def relax_couplings(vel, inv_mass, free, c_a, c_b, c_c, dt):
    """Exact update of each bonded pair under its damper alone.

    The relative velocity decays as exp(-c (1/m_a + 1/m_b) dt); the pair's
    momentum is unchanged. A fixed component acts as infinite mass.
    """
    for k in range(c_a.shape[0]):
        a = c_a[k]
        b = c_b[k]
        for d in range(2):
            ia = inv_mass[a] * free[a, d]
            ib = inv_mass[b] * free[b, d]
            isum = ia + ib
            if isum <= 0.0:
                continue
            w = vel[b, d] - vel[a, d]
            dw = w * (math.exp(-c_c[k] * isum * dt) - 1.0)
            vel[a, d] -= ia / isum * dw
            vel[b, d] += ib / isum * dw


@njit(cache=True)
def compute_forces(
    pos, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef, c_a, c_b, c_k,
    t_node, t_force, t_k, t_anchor, act_node, act_dir, fmag, ext, out,
):
    for i in range(pos.shape[0]):
        out[i, 0] = ext[i, 0]
        out[i, 1] = ext[i, 1]
    status = accumulate_stretch(pos, e_i, e_j, e_rest, e_ea, out)
    if status != STATUS_OK:
        return status
    accumulate_bend(pos, b_a, b_b, b_c, b_coef, out)
    accumulate_coupling_springs(pos, c_a, c_b, c_k, out)
    accumulate_loads(pos, t_node, t_force, t_k, t_anchor, out)
    if act_node >= 0:
        out[act_node, 0] += fmag * act_dir[0]
        out[act_node, 1] += fmag * act_dir[1]
    return STATUS_OK


@njit(cache=True)
def verlet_step(
    pos, vel, inv_mass, free, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef,
    c_a, c_b, c_k, c_c, t_node, t_force, t_k, t_anchor, act_node, act_dir, fmag,
    ext, dt, decay, forces,
):
    """One damped position-Verlet (drift-kick-drift) step, in place."""
    n = pos.shape[0]
    half = 0.5 * dt
    for i in range(n):
        pos[i, 0] += half * vel[i, 0]
        pos[i, 1] += half * vel[i, 1]
    status = compute_forces(
        pos, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef, c_a, c_b, c_k,
        t_node, t_force, t_k, t_anchor, act_node, act_dir, fmag, ext, forces,
    )
    if status != STATUS_OK:
        return status
    for i in range(n):
        for d in range(2):
            vel[i, d] = (vel[i, d] + dt * forces[i, d] * inv_mass[i]) * decay * free[i, d]
    relax_couplings(vel, inv_mass, free, c_a, c_b, c_c, dt)
    total = 0.0
    for i in range(n):
        pos[i, 0] += half * vel[i, 0]
        pos[i, 1] += half * vel[i, 1]
        total += pos[i, 0] + pos[i, 1] + vel[i, 0] + vel[i, 1]
    if not np.isfinite(total):
        return STATUS_NONFINITE
    return STATUS_OK


@njit(cache=True)
def integrate(
    pos, vel, inv_mass, free, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef,
    c_a, c_b, c_k, c_c, t_node, t_force, t_k, t_anchor, act_node, act_dir,
    drive, substeps, dt, decay, ext, probe_nodes, baseline, record,
):
    """Advance through ``drive`` and record probe displacements at every sample.

    ``drive[s]`` is the actuation magnitude at sample instant ``s``; between
    samples it is interpolated linearly at each substep midpoint. Row ``s`` of
    ``record`` holds ``[dx, dy]`` per probe node at sample ``s`` (before the
    state is advanced past it). Returns ``(status, steps_taken)``.
    """
    forces = np.zeros_like(pos)
    n_samples = record.shape[0]
    n_probes = probe_nodes.shape[0]
    steps = 0
    for s in range(n_samples):
        for p in range(n_probes):
            node = probe_nodes[p]
            record[s, 2 * p] = pos[node, 0] - baseline[p, 0]
            record[s, 2 * p + 1] = pos[node, 1] - baseline[p, 1]
        if s == n_samples - 1:
            break
        f0 = drive[s]
        f1 = drive[s + 1]
        for k in range(substeps):
            fmag = f0 + (f1 - f0) * (k + 0.5) / substeps
            status = verlet_step(
                pos, vel, inv_mass, free, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef,
                c_a, c_b, c_k, c_c, t_node, t_force, t_k, t_anchor, act_node, act_dir, fmag,
                ext, dt, decay, forces,
            )
            steps += 1
            if status != STATUS_OK:
                return status, steps
    return STATUS_OK, steps


@njit(cache=True)
def advance(
    pos, vel, inv_mass, free, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef,
    c_a, c_b, c_k, c_c, t_node, t_force, t_k, t_anchor, act_node, act_dir,
    fmag, n_steps, dt, decay, ext,
):
    """Advance ``n_steps`` under a constant actuation magnitude. Returns ``(status, steps_taken)``."""
    forces = np.zeros_like(pos)
    for k in range(n_steps):
        status = verlet_step(
            pos, vel, inv_mass, free, e_i, e_j, e_rest, e_ea, b_a, b_b, b_c, b_coef,
            c_a, c_b, c_k, c_c, t_node, t_force, t_k, t_anchor, act_node, act_dir, fmag,
            ext, dt, decay, forces,
        )
        if status != STATUS_OK:
            return status, k + 1
    return STATUS_OK, n_steps


@njit(cache=True)
def stretch_energy(pos, e_i, e_j, e_rest, e_ea):
    total = 0.0
    for k in range(e_i.shape[0]):
        dx = pos[e_j[k], 0] - pos[e_i[k], 0]
        dy = pos[e_j[k], 1] - pos[e_i[k], 1]
        ext = math.sqrt(dx * dx + dy * dy) - e_rest[k]
        total += 0.5 * e_ea[k] / e_rest[k] * ext * ext
    return total


@njit(cache=True)
def bend_energy(pos, b_a, b_b, b_c, b_coef):
    total = 0.0
    for k in range(b_a.shape[0]):
        a = b_a[k]
        b = b_b[k]
        c = b_c[k]
        e1x = pos[b, 0] - pos[a, 0]
        e1y = pos[b, 1] - pos[a, 1]
        e2x = pos[c, 0] - pos[b, 0]
        e2y = pos[c, 1] - pos[b, 1]
        phi = math.atan2(e1x * e2y - e1y * e2x, e1x * e2x + e1y * e2y)
        total += 0.5 * b_coef[k] * phi * phi
    return total


@njit(cache=True)
def kinetic_energy(vel, inv_mass):
    total = 0.0
    for i in range(vel.shape[0]):
        if inv_mass[i] > 0.0:
            total += 0.5 * (vel[i, 0] * vel[i, 0] + vel[i, 1] * vel[i, 1]) / inv_mass[i]
    return total
