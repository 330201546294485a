//! Spin-dependent translations on periodic lattices.
//!
//! Convention: after a shift, component `s` at site `k` holds what component
//! `s` held at site `k + d(s)` along the shift axis. For the two-component
//! shift `S`, `d(↑) = +1` and `d(↓) = −1`, so spin-up probability moves
//! towards lower indices. The block shift `diag(S, S†)` uses
//! `d = (+1, −1, −1, +1)` on `(ψ¹↑, ψ¹↓, ψ²↑, ψ²↓)`. Adjoints flip every sign.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, WalkError};
use crate::lattice::{Axis, LatticeGeometry, SpinorField};

/// Per-component read offsets of a shift.
pub fn displacements(spin_dim: usize, adjoint: bool) -> &'static [isize] {
    match (spin_dim, adjoint) {
        (2, false) => &[1, -1],
        (2, true) => &[-1, 1],
        (4, false) => &[1, -1, -1, 1],
        (4, true) => &[-1, 1, 1, -1],
        _ => &[],
    }
}

/// Gather `src` into `dst` according to the per-component offsets.
pub(crate) fn shift_into(
    src: &[Complex64],
    dst: &mut [Complex64],
    geometry: &LatticeGeometry,
    spin_dim: usize,
    axis: Axis,
    disp: &[isize],
) {
    let n = geometry.size(axis);
    let slice = geometry.stride(axis) * spin_dim;
    let min_len = (4096 / slice).max(1);
    dst.par_chunks_mut(slice)
        .with_min_len(min_len)
        .enumerate()
        .for_each(|(chunk, out)| {
            let block = chunk / n;
            let j = chunk % n;
            for (s, &d) in disp.iter().enumerate() {
                let from = (j as isize + d).rem_euclid(n as isize) as usize;
                let base = (block * n + from) * slice;
                let input = &src[base..base + slice];
                for (o, i) in out[s..].iter_mut().step_by(spin_dim).zip(input[s..].iter().step_by(spin_dim)) {
                    *o = *i;
                }
            }
        });
}

fn shifted(field: &SpinorField, axis: Axis, adjoint: bool) -> Result<SpinorField> {
    field.geometry().check_axis(axis)?;
    let mut out = SpinorField::zeros(field.geometry().clone(), field.spin_dim())?;
    shift_into(
        field.amplitudes(),
        out.amplitudes_mut(),
        field.geometry(),
        field.spin_dim(),
        axis,
        displacements(field.spin_dim(), adjoint),
    );
    Ok(out)
}

fn require_spin(field: &SpinorField, spin_dim: usize) -> Result<()> {
    if field.spin_dim() == spin_dim {
        Ok(())
    } else {
        Err(WalkError::Mismatch(format!(
            "expected a {spin_dim}-component field, got {}",
            field.spin_dim()
        )))
    }
}

/// `S^axis` on a two-component field.
pub fn shift_2d(field: &SpinorField, axis: Axis) -> Result<SpinorField> {
    require_spin(field, 2)?;
    shifted(field, axis, false)
}

/// `(S^axis)†`, the inverse of [`shift_2d`].
pub fn shift_2d_adjoint(field: &SpinorField, axis: Axis) -> Result<SpinorField> {
    require_spin(field, 2)?;
    shifted(field, axis, true)
}

/// `diag(S^axis, S^axis†)` on a four-component field.
pub fn shift_3d_block(field: &SpinorField, axis: Axis) -> Result<SpinorField> {
    require_spin(field, 4)?;
    shifted(field, axis, false)
}

/// Inverse of [`shift_3d_block`].
pub fn shift_3d_block_adjoint(field: &SpinorField, axis: Axis) -> Result<SpinorField> {
    require_spin(field, 4)?;
    shifted(field, axis, true)
}
