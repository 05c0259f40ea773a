#pragma once

namespace stck {

// Input-to-grid downsampling ratio.
inline constexpr int kDownsample = 4;
// Channels of the search feature map F.
inline constexpr int kSearchChannels = 16;
// Channels of the motion-aware feature map (motion offsets + F).
inline constexpr int kMotionAwareChannels = kSearchChannels + 2;
// Flat length of one object's dynamic searcher weights:
// 18->8 (144+8), 8->8 (64+8), 8->1 (8+1).
inline constexpr int kThetaLen = 233;
inline constexpr int kSearcherHidden = 8;
// Backbone output channels.
inline constexpr int kBackboneChannels = 64;

// Pixel <-> output-grid coordinate maps. Grid coordinate g sits at the center
// of its cell: pixel = (g + 0.5) * R.
inline double px_to_grid(double px) { return px / kDownsample - 0.5; }
inline double grid_to_px(double g) { return (g + 0.5) * kDownsample; }

}  // namespace stck
