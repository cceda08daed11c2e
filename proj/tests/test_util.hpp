#pragma once

#include "drfuse/error.hpp"

#include <gtest/gtest.h>

#include <functional>

// Kind of the drfuse::Error thrown by fn; fails the test when nothing is thrown.
inline drfuse::ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const drfuse::Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no drfuse::Error thrown";
    return drfuse::ErrorKind::Internal;
}
