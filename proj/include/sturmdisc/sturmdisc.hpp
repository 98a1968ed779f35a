#pragma once

#include <sturmdisc/asymptotics.hpp>
#include <sturmdisc/charfn.hpp>
#include <sturmdisc/entire.hpp>
#include <sturmdisc/norming.hpp>
#include <sturmdisc/spectrum.hpp>
#include <sturmdisc/uniqueness.hpp>
#include <sturmdisc/version.hpp>
