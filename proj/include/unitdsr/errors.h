// include/unitdsr/errors.h

// Copyright 2026  The unitdsr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef UNITDSR_ERRORS_H_
#define UNITDSR_ERRORS_H_

#include <stdexcept>
#include <string>

namespace unitdsr {

/// Base of every error thrown by the library.  Callers that only need to
/// report a failure can catch this; the subclasses exist so that tests and
/// the evaluation harness can distinguish failure kinds.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define UNITDSR_DEFINE_ERROR(Name)        \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

// dsp
UNITDSR_DEFINE_ERROR(AllSilentError);
UNITDSR_DEFINE_ERROR(DomainError);
UNITDSR_DEFINE_ERROR(ZeroSignalError);
UNITDSR_DEFINE_ERROR(TooShortError);
UNITDSR_DEFINE_ERROR(FeatureFileError);
UNITDSR_DEFINE_ERROR(AudioFormatError);

// codec
UNITDSR_DEFINE_ERROR(InsufficientDataError);
UNITDSR_DEFINE_ERROR(DimensionMismatchError);
UNITDSR_DEFINE_ERROR(EmptySequenceError);
UNITDSR_DEFINE_ERROR(EmptyReferenceError);
UNITDSR_DEFINE_ERROR(UnitRangeError);

// normalizer / text-to-unit / vocoder
UNITDSR_DEFINE_ERROR(InfeasibleTargetError);
UNITDSR_DEFINE_ERROR(EmptyDatasetError);
UNITDSR_DEFINE_ERROR(SpeakerFilterViolation);
UNITDSR_DEFINE_ERROR(EmptyTextError);
UNITDSR_DEFINE_ERROR(LengthMismatchError);
UNITDSR_DEFINE_ERROR(UnknownSpeakerError);

// eval
UNITDSR_DEFINE_ERROR(DivisionDomainError);
UNITDSR_DEFINE_ERROR(EmptyCollectionError);
UNITDSR_DEFINE_ERROR(IoError);

// pipeline
UNITDSR_DEFINE_ERROR(FieldCountError);
UNITDSR_DEFINE_ERROR(DuplicateIdError);
UNITDSR_DEFINE_ERROR(ManifestError);
UNITDSR_DEFINE_ERROR(ConfigError);
UNITDSR_DEFINE_ERROR(MissingPrerequisiteError);
UNITDSR_DEFINE_ERROR(ConfigMismatchError);
UNITDSR_DEFINE_ERROR(VersionError);
UNITDSR_DEFINE_ERROR(CorruptFileError);

#undef UNITDSR_DEFINE_ERROR

}  // namespace unitdsr

#endif  // UNITDSR_ERRORS_H_
