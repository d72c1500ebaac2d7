#pragma once

#include <cstdint>

#include "occfof/fof.hpp"
#include "occfof/image.hpp"

namespace occfof {

/// Visible and occluded parts of a body silhouette. Produced masks satisfy
/// visible & occluded == 0 and visible | occluded == body.
struct MaskPair {
  Mask visible;
  Mask occluded;
  Mask body;

  int width() const noexcept { return body.width; }
  int height() const noexcept { return body.height; }
  double occlusion_ratio() const;  // |occluded| / |body|
};

// Throws ShapeError on size mismatch and DomainError when the partition
// invariant does not hold.
void validate(const MaskPair& pair);

// Builds the pair for a fixed occluder region: occluded = region & body.
MaskPair partition_body(const Mask& body, const Mask& occluder);

enum class OccluderKind { Rectangle, Ellipse, Capsule };

// Where the occluder grows from. Interior occluders are centered on a seeded
// body pixel; border rectangles span a whole image side and grow inward.
enum class OccluderAnchor { Interior, Left, Right, Top, Bottom };

struct OccluderSpec {
  OccluderKind kind = OccluderKind::Rectangle;
  OccluderAnchor anchor = OccluderAnchor::Interior;
  std::uint64_t seed = 0;
  double ratio = 0.0;  // target |occluded| / |body|, in [0, 0.95]
};

inline constexpr double kRatioTolerance = 0.02;
inline constexpr int kBisectionIterations = 40;
inline constexpr int kMaxReseeds = 8;

/// Places the seeded occluder and bisects its scale (40 iterations) to the
/// threshold where the covered fraction of the body reaches the target, then
/// keeps whichever neighbouring scale lands closer. Fails over to up to
/// eight reseeded placements when the result is off by more than 0.02, then
/// throws DomainError.
MaskPair synthesize_occlusion(const Mask& body, const OccluderSpec& spec);

/// Visibility-aware supervision weights:
///   lambda_occ where M = 1, lambda_vis where V = 1 and M = 0, 0 elsewhere.
/// Requires lambda_occ >= lambda_vis >= 0.
ScalarMap weight_map(const MaskPair& pair, double lambda_occ = 2.0, double lambda_vis = 1.0);

struct FieldCorruption {
  enum class Kind { Zero, Noise };
  Kind kind = Kind::Zero;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  static FieldCorruption zero() { return {}; }
  static FieldCorruption noise(double sigma, std::uint64_t seed) {
    return {Kind::Noise, sigma, seed};
  }
};

// Replaces coefficients at occluded pixels (zero, or additive Gaussian noise
// drawn in raster then channel order); other pixels are copied.
FourierField occlude_field(const FourierField& field, const MaskPair& pair,
                           const FieldCorruption& policy);

struct ImageFill {
  enum class Kind { Gray, Pattern };
  Kind kind = Kind::Gray;
  std::uint64_t seed = 0;
  int block = 8;  // pattern cell size in pixels

  static ImageFill gray() { return {}; }
  static ImageFill pattern(std::uint64_t seed) { return {Kind::Pattern, seed, 8}; }
};

// Paints occluded pixels with flat 0.5 gray or a seeded block pattern.
Image occlude_image(const Image& image, const MaskPair& pair, const ImageFill& fill);

}  // namespace occfof
