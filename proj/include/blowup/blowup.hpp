#ifndef BLOWUP_BLOWUP_HPP
#define BLOWUP_BLOWUP_HPP

#include "blowup/acceptance.hpp"
#include "blowup/config.hpp"
#include "blowup/core.hpp"
#include "blowup/evolve.hpp"
#include "blowup/experiment.hpp"
#include "blowup/io.hpp"
#include "blowup/mehler.hpp"
#include "blowup/numerics.hpp"
#include "blowup/profile.hpp"
#include "blowup/report.hpp"
#include "blowup/verify.hpp"
#include "blowup/weighted.hpp"

#endif  // BLOWUP_BLOWUP_HPP
