#pragma once

#include "kdr/baselines.hpp"
#include "kdr/csv_io.hpp"
#include "kdr/dataset.hpp"
#include "kdr/error.hpp"
#include "kdr/evalbench.hpp"
#include "kdr/kernel_gram.hpp"
#include "kdr/objective.hpp"
#include "kdr/stiefel.hpp"
#include "kdr/stiefel_opt.hpp"
#include "kdr/synth.hpp"
