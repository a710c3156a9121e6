#pragma once

// Umbrella header for the stx multi-view texture backprojection toolkit.

#include "stx/autodiff.hpp"
#include "stx/backproject.hpp"
#include "stx/camera.hpp"
#include "stx/error.hpp"
#include "stx/evalkit.hpp"
#include "stx/gather.hpp"
#include "stx/geodesics.hpp"
#include "stx/image.hpp"
#include "stx/manifest.hpp"
#include "stx/mesh.hpp"
#include "stx/net.hpp"
#include "stx/parallel.hpp"
#include "stx/pipeline.hpp"
#include "stx/primitives.hpp"
#include "stx/raster.hpp"
#include "stx/rng.hpp"
#include "stx/texelmap.hpp"
#include "stx/texture.hpp"
#include "stx/trainer.hpp"
#include "stx/vec.hpp"
