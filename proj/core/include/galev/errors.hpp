#pragma once

#include <stdexcept>
#include <string>

namespace galev {

// Malformed input files: bad JSON, ragged CSV rows, unparsable numbers.
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input that violates a documented invariant
// (duplicate photo ids, label out of range, dimension mismatch, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A photo present in the manifest has no feature vector.
class MissingFeatureError : public ValidationError {
public:
    explicit MissingFeatureError(const std::string& photo_id)
        : ValidationError("missing feature vector for photo \"" + photo_id + "\""),
          photo_id_(photo_id) {}

    const std::string& photo_id() const { return photo_id_; }

private:
    std::string photo_id_;
};

} // namespace galev
