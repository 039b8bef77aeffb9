// SPDX-License-Identifier: Apache-2.0
//
// pilotnet - learned pilots and channel estimation for wideband massive MIMO
// Copyright (C) 2026 The pilotnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PILOTNET_ERRORS_HPP
#define PILOTNET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pilotnet
{

// Invalid sizes, mismatched shapes or out-of-range configuration values
class ShapeError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// Least-squares system or atom set without full column rank
class RankError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// NaN/Inf encountered, or a quantity that must be positive is zero
class NumericError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Bad magic, version or header contents in a persisted file
class FormatError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

// Missing, unreadable or truncated file
class IoError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

} // namespace pilotnet

#endif
