#pragma once

#include "ssanet/arch/network.hpp"

namespace ssanet::arch {

/// Builds one member of the ablation family. With S = blocks_per_stage.size():
///
///  ssa2  stem conv, stage 0 at full resolution, then S-1 scale-space stages
///        [stride-2 conv doubling channels -> residual blocks at half
///        resolution -> x2 bilinear upsample]; every stage feeds a
///        full-resolution side output.
///  ssa3  ssa2 plus one extra scale-space stage (stage-0 width) right after
///        the stem.
///  dec   ssa2 without the per-stage upsample, so resolution compounds; side
///        outputs are upsampled back at the fusion head.
///  noms  ssa2 with stride 1 everywhere and no upsampling.
///  driu  double-conv stages separated by 2x2 max pooling, side outputs
///        upsampled at fusion.
///  driu-noms  driu without pooling.
///
/// All variants fuse by channel concatenation -> 1x1 conv -> sigmoid.
NetworkSpec build_variant(VariantId id, const ArchConfig& cfg);

}  // namespace ssanet::arch
