#pragma once

#include "archive_lens/analytics.hpp"
#include "archive_lens/error.hpp"
#include "archive_lens/framing.hpp"
#include "archive_lens/fusion.hpp"
#include "archive_lens/geometry.hpp"
#include "archive_lens/image.hpp"
#include "archive_lens/ingest.hpp"
#include "archive_lens/photo.hpp"
#include "archive_lens/report.hpp"
#include "archive_lens/similarity.hpp"
#include "archive_lens/transport.hpp"
#include "archive_lens/tsne.hpp"
