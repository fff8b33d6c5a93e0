// include/unitdsr/text.h

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

#ifndef UNITDSR_TEXT_H_
#define UNITDSR_TEXT_H_

#include <string>
#include <vector>

namespace unitdsr {

/// Lowercase, drop punctuation other than apostrophes, collapse whitespace,
/// trim.  Other bytes are kept as they are.
std::string NormalizeText(const std::string& text);

/// NormalizeText, then split on spaces.
std::vector<std::string> NormalizeWords(const std::string& text);

}  // namespace unitdsr

#endif  // UNITDSR_TEXT_H_
