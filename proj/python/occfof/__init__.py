"""Fourier occupancy fields with occlusion synthesis and visible-guided completion."""

from ._occfof import (
    DomainError,
    IoError,
    MeshError,
    ParseError,
    ShapeError,
    basis_eval,
    chamfer,
    decode_ray,
    degrade_prior,
    evaluate_pair,
    field_silhouette,
    intervals_to_coeffs,
    is_watertight,
    load_obj,
    make_shape,
    mesh_to_fof,
    mesh_volume,
    mse_coeff_loss,
    occlude_field,
    p2s,
    psnr,
    read_tensor,
    reconstruct,
    render_normals,
    save_obj,
    selftest,
    ssim,
    surface_area,
    synthesize_occlusion,
    vgcc_blend,
    weight_map,
    write_tensor,
)

__version__ = "0.1.0"
