#pragma once

#include "prn/error.hpp"
#include "prn/core.hpp"
#include "prn/markov.hpp"
#include "prn/morphisms.hpp"
#include "prn/subnet.hpp"
#include "prn/linfield.hpp"
#include "prn/algebra.hpp"
#include "prn/netio.hpp"
