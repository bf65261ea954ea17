#pragma once

// Convenience umbrella: the full library in one include.

#include "specpos/assoc.hpp"
#include "specpos/equivalence.hpp"
#include "specpos/intmat.hpp"
#include "specpos/io.hpp"
#include "specpos/localization.hpp"
#include "specpos/module.hpp"
#include "specpos/numbers.hpp"
#include "specpos/presheaf.hpp"
#include "specpos/ring.hpp"
#include "specpos/spectrum.hpp"
