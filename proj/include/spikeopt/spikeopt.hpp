#pragma once

#include "spikeopt/bounded.hpp"
#include "spikeopt/errors.hpp"
#include "spikeopt/numerics.hpp"
#include "spikeopt/phase_model.hpp"
#include "spikeopt/simulate.hpp"
#include "spikeopt/transcription.hpp"
#include "spikeopt/unbounded.hpp"
