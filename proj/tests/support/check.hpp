#pragma once

#include <functional>

#include <gtest/gtest.h>

#include "sqpo/error.hpp"

// Code of the sqpo::Error thrown by fn; records a failure if none is thrown.
inline sqpo::ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const sqpo::Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return sqpo::ErrorCode::Usage;
}
