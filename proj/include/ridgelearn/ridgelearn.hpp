#pragma once

#include "ridgelearn/errors.hpp"
#include "ridgelearn/linalg.hpp"
#include "ridgelearn/random.hpp"
#include "ridgelearn/sampling.hpp"
#include "ridgelearn/quadrature.hpp"
#include "ridgelearn/oracle.hpp"
#include "ridgelearn/l1.hpp"
#include "ridgelearn/recovery.hpp"
#include "ridgelearn/analysis.hpp"
#include "ridgelearn/experiments.hpp"
