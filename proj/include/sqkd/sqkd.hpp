#pragma once

// Umbrella header.

#include "sqkd/analysis.hpp"
#include "sqkd/attack.hpp"
#include "sqkd/errors.hpp"
#include "sqkd/io.hpp"
#include "sqkd/protocol.hpp"
#include "sqkd/quantum.hpp"
#include "sqkd/random.hpp"
