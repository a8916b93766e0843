// Copyright 2026 The cuboidlift Authors
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

#ifndef CUBOIDLIFT__ERROR_HPP_
#define CUBOIDLIFT__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace cuboidlift
{

// Malformed input or a violated invariant. `where` names the file and/or field.
class ValidationError : public std::runtime_error
{
public:
  ValidationError(std::string where, const std::string & what)
  : std::runtime_error(where.empty() ? what : where + ": " + what), where_(std::move(where))
  {
  }

  const std::string & where() const noexcept { return where_; }

private:
  std::string where_;
};

// A file could not be opened, read or written.
class IoError : public std::runtime_error
{
public:
  IoError(std::string path, const std::string & what)
  : std::runtime_error(path + ": " + what), path_(std::move(path))
  {
  }

  const std::string & path() const noexcept { return path_; }

private:
  std::string path_;
};

}  // namespace cuboidlift

#endif  // CUBOIDLIFT__ERROR_HPP_
