#pragma once

#include <stdexcept>
#include <string>

namespace gdl {

/// Base for every error raised by the layout engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad argument or precondition violation (size parameters, k out of range, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Some pair of nodes has no path between them.
class DisconnectedGraph : public Error {
public:
    using Error::Error;
};

/// Two nodes share a position where a loss needs the gradient of their distance.
class CoincidentNodes : public Error {
public:
    CoincidentNodes(int i, int j)
        : Error("nodes " + std::to_string(i) + " and " + std::to_string(j) + " coincide"),
          first(i), second(j) {}
    int first;
    int second;
};

/// Layout is degenerate for the requested quantity (zero-length edge, all nodes coincident).
class DegenerateLayout : public Error {
public:
    using Error::Error;
};

/// A NaN or Inf appeared in the objective or its gradient.
class NumericalDivergence : public Error {
public:
    NumericalDivergence(int iteration, const std::string& what)
        : Error("numerical divergence at iteration " + std::to_string(iteration) + ": " + what),
          iteration(iteration) {}
    int iteration;
};

/// Malformed input file or unreadable path.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace gdl
