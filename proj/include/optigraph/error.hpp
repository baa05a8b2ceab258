// Copyright 2026 The OptiGraph Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace optigraph {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define OPTIGRAPH_DEFINE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// model-core
OPTIGRAPH_DEFINE_ERROR(BoundError);
OPTIGRAPH_DEFINE_ERROR(EdgeArityError);
OPTIGRAPH_DEFINE_ERROR(ScopeError);
OPTIGRAPH_DEFINE_ERROR(HierarchyError);
OPTIGRAPH_DEFINE_ERROR(ConvexityError);
OPTIGRAPH_DEFINE_ERROR(IntegrityError);
// topology / partition
OPTIGRAPH_DEFINE_ERROR(ParameterError);
OPTIGRAPH_DEFINE_ERROR(PartitionError);
OPTIGRAPH_DEFINE_ERROR(BalanceError);
OPTIGRAPH_DEFINE_ERROR(StalenessError);
// solvers
OPTIGRAPH_DEFINE_ERROR(StructureError);
OPTIGRAPH_DEFINE_ERROR(RankError);
OPTIGRAPH_DEFINE_ERROR(ClassificationError);
OPTIGRAPH_DEFINE_ERROR(StateError);
// model library / io
OPTIGRAPH_DEFINE_ERROR(ConfigError);
OPTIGRAPH_DEFINE_ERROR(ModelError);
OPTIGRAPH_DEFINE_ERROR(ParseError);
OPTIGRAPH_DEFINE_ERROR(ReferenceError);

#undef OPTIGRAPH_DEFINE_ERROR

}  // namespace optigraph
