#ifndef RISKMENU_RISKMENU_HPP
#define RISKMENU_RISKMENU_HPP

#include "riskmenu/core_model.hpp"
#include "riskmenu/distributions.hpp"
#include "riskmenu/errors.hpp"
#include "riskmenu/multi_asset.hpp"
#include "riskmenu/partitioning.hpp"
#include "riskmenu/robust.hpp"
#include "riskmenu/single_decision.hpp"
#include "riskmenu/welfare_bounds.hpp"

#endif // RISKMENU_RISKMENU_HPP
