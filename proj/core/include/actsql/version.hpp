#pragma once

#define ACTSQL_VERSION_MAJOR 0
#define ACTSQL_VERSION_MINOR 1
#define ACTSQL_VERSION_PATCH 0
#define ACTSQL_VERSION "0.1.0"
