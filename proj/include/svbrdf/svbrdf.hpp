#pragma once

#include "svbrdf/common.hpp"
#include "svbrdf/image.hpp"
#include "svbrdf/io.hpp"
#include "svbrdf/loss.hpp"
#include "svbrdf/material.hpp"
#include "svbrdf/metrics.hpp"
#include "svbrdf/network.hpp"
#include "svbrdf/optimizer.hpp"
#include "svbrdf/procedural.hpp"
#include "svbrdf/rectify.hpp"
#include "svbrdf/renderer.hpp"
#include "svbrdf/scene_io.hpp"
#include "svbrdf/synthesis.hpp"
