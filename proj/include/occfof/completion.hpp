#pragma once

#include "occfof/fof.hpp"
#include "occfof/image.hpp"
#include "occfof/mesh.hpp"
#include "occfof/occlusion.hpp"

namespace occfof {

/// Coarse stand-in for a fitted body prior: `iterations` Jacobi steps of
/// uniform Laplacian smoothing, v += strength * (mean(neighbours) - v).
/// Topology is untouched. Vertex normals are recomputed when present.
/// Requires iterations >= 0 and strength in [0, 1].
TriMesh degrade_prior(const TriMesh& mesh, int iterations, double strength);

// Two-pass chamfer distance transform (unit axial steps, sqrt(2) diagonal
// steps) to the nearest set pixel of `seeds`. Pixels are infinitely far
// when `seeds` is empty.
ScalarMap distance_transform(const Mask& seeds);

// Blend weight of the observed field: 1 on visible pixels, on occluded
// pixels max(0, 1 - d / feather) where d is the chamfer distance to the
// nearest visible pixel (0 everywhere in M when feather is 0), and 1 on
// background.
ScalarMap blend_weights(const MaskPair& pair, double feather_px);

/// alpha * observed + (1 - alpha) * prior per pixel with alpha from
/// blend_weights; background pixels copy `observed`.
FourierField vgcc_blend(const FourierField& observed, const FourierField& prior,
                        const MaskPair& pair, double feather_px = 3.0);

}  // namespace occfof
