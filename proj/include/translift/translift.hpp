#pragma once

#include "translift/bundle.hpp"
#include "translift/common.hpp"
#include "translift/config.hpp"
#include "translift/connection.hpp"
#include "translift/example_transports.hpp"
#include "translift/factorization.hpp"
#include "translift/group.hpp"
#include "translift/interval.hpp"
#include "translift/parallel.hpp"
#include "translift/path.hpp"
#include "translift/report.hpp"
#include "translift/transport.hpp"
