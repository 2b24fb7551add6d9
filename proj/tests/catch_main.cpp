/*
 * Licensed under the terms of the Apache 2.0 License.
 * See LICENSE file in the project root for terms.
 */
#define CATCH_CONFIG_MAIN
#include <catch2/catch.hpp>
