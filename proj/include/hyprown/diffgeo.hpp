#pragma once

#include "hyprown/autodiff.hpp"

// Differentiable (tape-recorded) counterparts of the geometry ops,
// batched over rows: points are [B, n+1] matrices, tangent coordinates
// and mean parameters are [B, n]. A [1, k] operand broadcasts against a
// [B, k] one, so shared parameters can meet per-sample noise directly.

namespace hyprown::ad::dgeo {

// Guard floor for directions/denominators that degenerate at measure-zero
// configurations; clamped branches carry zero gradient.
inline constexpr double kDirFloor = 1e-12;

Var origin_rows(Tape& t, std::size_t n);  // constant [1, n+1] = [1,0,...]

Var lorentz_inner_rows(Var a, Var b);        // [B,1]
Var lift_rows(Var m);                        // mean params -> exp_0([0,m])
Var exp_map_rows(Var x, Var u);              // u rows tangent at x rows
Var log_map_rows(Var x, Var y);
Var pt_rows(Var x, Var y, Var v);            // parallel transport x -> y
Var wrap_rows(Var mu, Var v);                // v: [B,n] tangent coords at 0
Var unwrap_rows(Var mu, Var z);              // -> [B,n]
Var distance_rows(Var x, Var y);             // [B,1]
Var to_poincare_rows(Var z);                 // [B,n]
Var poincare_norm_rows(Var z);               // [B,1]

// Rowwise unit vectors m / max(||m||, kDirFloor).
Var unit_rows(Var m);
// Applies the Eq. 4 rotation taking e1 to each (unit) row of dir: R v.
Var rotate_rows(Var dir, Var v);
// Applies the inverse rotation: R^T v.
Var rotate_back_rows(Var dir, Var v);

}  // namespace hyprown::ad::dgeo
