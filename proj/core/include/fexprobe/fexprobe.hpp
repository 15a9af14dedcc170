#pragma once

#include "fexprobe/analysis.hpp"
#include "fexprobe/embedding.hpp"
#include "fexprobe/error.hpp"
#include "fexprobe/ks_matrix.hpp"
#include "fexprobe/labels.hpp"
#include "fexprobe/layers.hpp"
#include "fexprobe/noise.hpp"
#include "fexprobe/parallel.hpp"
#include "fexprobe/random.hpp"
#include "fexprobe/stats.hpp"
#include "fexprobe/synth.hpp"
