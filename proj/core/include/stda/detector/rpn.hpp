#pragma once

#include <span>
#include <vector>

#include "stda/detector/anchors.hpp"
#include "stda/nn/layers.hpp"

namespace stda {

struct RpnOutput {
    nn::Var objectness;  // [N, A, H', W'] logits
    nn::Var deltas;      // [N, 4A, H', W'], channel a * 4 + k
};

/// Shared 3x3 conv followed by sibling 1x1 objectness and box-delta convs.
class RegionProposalNetwork {
public:
    RegionProposalNetwork(int in_channels, int hidden_channels, const AnchorConfig& config, nn::Rng& rng);

    RpnOutput operator()(const nn::Var& sf_map) const;
    void collect(nn::ParameterSet& into, const std::string& prefix) const;

private:
    nn::Conv2d conv_, objectness_, deltas_;
};

struct Proposal {
    BoundingBox box;
    double objectness = 0.0;
};

/// Per-image proposals: decode every anchor, clip to the image, drop boxes
/// smaller than `min_size`, keep the `pre_nms_top_n` best, suppress at
/// `nms_iou`, return at most `keep` sorted by objectness.
std::vector<std::vector<Proposal>> generate_proposals(const RpnOutput& rpn, std::span<const BoundingBox> anchors,
                                                      const AnchorConfig& config, int image_width, int image_height,
                                                      int keep);

/// RPN objective over the first gt_per_image.size() images of the batch:
/// mean binary cross-entropy over non-ignored anchors plus smooth-L1
/// (beta 1/9) on positive anchors' deltas, averaged over positives. Images
/// without ground truth contribute negatives only.
nn::Var rpn_loss(const RpnOutput& rpn, std::span<const BoundingBox> anchors,
                 std::span<const std::vector<BoundingBox>> gt_per_image, const AnchorConfig& config);

}  // namespace stda
