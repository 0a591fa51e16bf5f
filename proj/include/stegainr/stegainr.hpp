#pragma once

#include "stegainr/codec.hpp"
#include "stegainr/config.hpp"
#include "stegainr/errors.hpp"
#include "stegainr/image.hpp"
#include "stegainr/image_io.hpp"
#include "stegainr/keying.hpp"
#include "stegainr/masking.hpp"
#include "stegainr/metrics.hpp"
#include "stegainr/model_io.hpp"
#include "stegainr/nn.hpp"
#include "stegainr/random.hpp"
#include "stegainr/robustness.hpp"
#include "stegainr/steg_train.hpp"
