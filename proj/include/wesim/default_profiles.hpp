#pragma once

#include "wesim/profiles.hpp"

namespace wesim {

/// Starting point of the calibration search (hand-derived from the task
/// structure; see `wesim fit`).
inline ProfileSet seed_profiles() {
    ProfileSet p;
    p.fastq_gb = 8.0;
    p.reference_genome_gb = 5.0;
    p.dictionary_gb = 2.6;

    p.templates[templates::align] = {templates::align, ThreadModel::configurable(24), MemoryModel::fixed(8.0),
                                     WorkModel{600.0, 8500.0}, true, OutputSizeModel{0.0, 0.9}};
    p.templates[templates::split] = {templates::split, ThreadModel::fixed(1), MemoryModel::fixed(1.0),
                                     WorkModel{60.0, 30.0}, true, OutputSizeModel{0.0, 1.0}};
    p.templates[templates::mutect] = {templates::mutect, ThreadModel::fixed(1), MemoryModel::fixed(3.0),
                                      WorkModel{25.0, 2.0}, true, OutputSizeModel{0.01, 0.0}};
    p.templates[templates::filter] = {templates::filter, ThreadModel::fixed(1), MemoryModel::fixed(0.1),
                                      WorkModel{5.0, 0.0}, true, OutputSizeModel{0.0, 0.5}};
    p.templates[templates::merge] = {templates::merge, ThreadModel::fixed(1), MemoryModel::fixed(0.5),
                                     WorkModel{30.0, 10.0}, true, OutputSizeModel{0.0, 1.0}};
    p.templates[templates::compress] = {templates::compress, ThreadModel::fixed(1), MemoryModel::fixed(0.1),
                                        WorkModel{60.0, 20.0}, true, OutputSizeModel{0.0, 0.3}};

    // Unfused alignment chain; the aligner carries the bulk of the work.
    p.templates["trimadap"] = {"trimadap", ThreadModel::configurable(8), MemoryModel::fixed(0.5),
                               WorkModel{30.0, 60.0}, true, OutputSizeModel{0.0, 0.95}};
    p.templates["bwa_mem"] = {"bwa_mem", ThreadModel::configurable(24), MemoryModel::fixed(8.0),
                              WorkModel{600.0, 8000.0}, true, OutputSizeModel{0.0, 2.0}};
    p.templates["samblaster"] = {"samblaster", ThreadModel::fixed(1), MemoryModel::fixed(0.5),
                                 WorkModel{30.0, 40.0}, true, OutputSizeModel{0.0, 1.0}};
    p.templates["samtools_sort"] = {"samtools_sort", ThreadModel::configurable(8), MemoryModel::fixed(1.0),
                                    WorkModel{30.0, 300.0}, true, OutputSizeModel{0.0, 0.35}};

    p.clusters["SA"] = ClusterTuning{1.0, {{templates::align, 3}}};
    p.clusters["YC"] = ClusterTuning{1.0, {}};
    p.clusters["HPC"] = ClusterTuning{4.0, {{templates::align, 24}}};
    p.clusters["EC2"] = ClusterTuning{1.0, {}};
    return p;
}

/// The committed calibration result used by default everywhere: the seed set
/// with the fitted values from `wesim fit` against the reference runs.
inline ProfileSet default_profiles() {
    ProfileSet p = seed_profiles();
    p.fastq_gb = 8.0;
    auto& align = p.at(templates::align);
    align.work = {2200.81, 8500.0};
    align.output_size.ratio = 0.939846;
    p.at(templates::split).work = {179.149, 27.5101};
    p.at(templates::mutect).work = {50.0, 1.83401};
    p.at(templates::filter).work.serial_s = 4.58502;
    p.at(templates::merge).work.serial_s = 261.722;
    p.at(templates::compress).work.serial_s = 261.722;
    p.clusters["YC"].speed = 0.957603;
    p.clusters["HPC"].speed = 4.26856;
    return p;
}

} // namespace wesim
