#pragma once

// Umbrella header for the rstcoh library.

#include "rstcoh/adam.hpp"
#include "rstcoh/config.hpp"
#include "rstcoh/corpus.hpp"
#include "rstcoh/edu_encoder.hpp"
#include "rstcoh/errors.hpp"
#include "rstcoh/lstm.hpp"
#include "rstcoh/metrics.hpp"
#include "rstcoh/model.hpp"
#include "rstcoh/parseq.hpp"
#include "rstcoh/rst_tree.hpp"
#include "rstcoh/tape.hpp"
#include "rstcoh/tensor.hpp"
#include "rstcoh/trainer.hpp"
#include "rstcoh/tree_model.hpp"
