// Copyright (c) 2026 The meshtex Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "meshtex/attention.hpp"
#include "meshtex/bvh.hpp"
#include "meshtex/error.hpp"
#include "meshtex/flow.hpp"
#include "meshtex/image.hpp"
#include "meshtex/kdtree.hpp"
#include "meshtex/lowpoly.hpp"
#include "meshtex/marching_cubes.hpp"
#include "meshtex/math.hpp"
#include "meshtex/mesh.hpp"
#include "meshtex/mesh_io.hpp"
#include "meshtex/primitives.hpp"
#include "meshtex/rng.hpp"
#include "meshtex/sampling.hpp"
#include "meshtex/sdf.hpp"
#include "meshtex/texture.hpp"
#include "meshtex/uv_atlas.hpp"
#include "meshtex/view.hpp"
