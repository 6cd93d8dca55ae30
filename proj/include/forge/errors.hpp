// Copyright 2026 The Forge Authors
//
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

namespace forge {

// Exit-code class a failure maps to at the command line.
enum class ErrorClass {
    Validation = 1,  // bad input, malformed config, violated contract
    Io = 2,          // filesystem, network, or external backend failure
};

// Base of every error the library raises. `kind()` is a stable identifier
// that the CLI prints on its single error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, ErrorClass cls, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)), class_(cls) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorClass error_class() const noexcept { return class_; }

private:
    std::string kind_;
    ErrorClass class_;
};

#define FORGE_DEFINE_ERROR(Name, Cls)                                        \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name, Cls, what) {} \
    }

FORGE_DEFINE_ERROR(DecodeError, ErrorClass::Io);
FORGE_DEFINE_ERROR(EncodeError, ErrorClass::Io);
FORGE_DEFINE_ERROR(IoError, ErrorClass::Io);
FORGE_DEFINE_ERROR(RectOutOfBounds, ErrorClass::Validation);
FORGE_DEFINE_ERROR(PlanMismatch, ErrorClass::Validation);
FORGE_DEFINE_ERROR(MissingPatchFile, ErrorClass::Io);
FORGE_DEFINE_ERROR(InsufficientLabels, ErrorClass::Validation);
FORGE_DEFINE_ERROR(UnlabeledSource, ErrorClass::Validation);
FORGE_DEFINE_ERROR(DuplicatePatchId, ErrorClass::Validation);
FORGE_DEFINE_ERROR(EmptyClass, ErrorClass::Validation);
FORGE_DEFINE_ERROR(ClassSmallerThanK, ErrorClass::Validation);
FORGE_DEFINE_ERROR(ShapeMismatch, ErrorClass::Validation);
FORGE_DEFINE_ERROR(DataUnavailable, ErrorClass::Io);
FORGE_DEFINE_ERROR(BackendFailed, ErrorClass::Io);
FORGE_DEFINE_ERROR(MalformedResults, ErrorClass::Validation);
FORGE_DEFINE_ERROR(EmptyResults, ErrorClass::Validation);
FORGE_DEFINE_ERROR(PortUnavailable, ErrorClass::Io);
FORGE_DEFINE_ERROR(MissingPatchDir, ErrorClass::Io);
FORGE_DEFINE_ERROR(ConfigError, ErrorClass::Validation);
FORGE_DEFINE_ERROR(FormatError, ErrorClass::Validation);

#undef FORGE_DEFINE_ERROR

}  // namespace forge
