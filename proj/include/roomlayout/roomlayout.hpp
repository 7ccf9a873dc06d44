#pragma once

// Single-view 3D room layout reconstruction from plane hypotheses,
// planar-region masks, and a depth map, by constrained discrete optimization
// over candidate polygons with iterative render-and-compare refinement.

#include "roomlayout/camera.hpp"
#include "roomlayout/candidates.hpp"
#include "roomlayout/cost.hpp"
#include "roomlayout/image.hpp"
#include "roomlayout/layout.hpp"
#include "roomlayout/math.hpp"
#include "roomlayout/metrics.hpp"
#include "roomlayout/pipeline.hpp"
#include "roomlayout/plane.hpp"
#include "roomlayout/plane_fit.hpp"
#include "roomlayout/raster.hpp"
#include "roomlayout/refine.hpp"
#include "roomlayout/scene_io.hpp"
#include "roomlayout/solver.hpp"
#include "roomlayout/synth.hpp"
