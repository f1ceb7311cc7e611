#!/usr/bin/env node
/**
 * clipper-export: embed an image dataset and write a .mwie file.
 *
 * Exit codes: 0 success, 2 usage/config error, 3 dataset/backbone error.
 */

import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { BackboneError, resolveBackbone } from "./backbone";
import { DatasetError, loadDataset } from "./dataset";
import { exportToFile } from "./export";
import { ResizePolicy } from "./image";

export async function main(argv: string[]): Promise<number> {
  const parser = yargs(argv)
    .scriptName("clipper-export")
    .usage(
      "$0 --backbone <id> --dataset <id|path> --out <file.mwie> " +
        "[--augmentations N] [--trivial] [--seed S]",
    )
    .option("backbone", {
      type: "string",
      default: "clip-vit-b32",
      describe: "embedding backbone id (clip-vit-b32, stub, stub-<dim>)",
    })
    .option("dataset", {
      type: "string",
      demandOption: true,
      describe: "dataset id (cifar10), a CIFAR .bin file/dir, or an image folder",
    })
    .option("out", {
      type: "string",
      demandOption: true,
      describe: "output .mwie path",
    })
    .option("augmentations", {
      type: "number",
      default: 0,
      describe: "augmented copies to add per image (original is always kept)",
    })
    .option("trivial", {
      type: "boolean",
      default: false,
      describe: "make augmented copies pixel-identical duplicates of the original",
    })
    .option("seed", {
      type: "string",
      default: "0",
      describe: "base seed for all augmentation randomness (64-bit integer)",
    })
    .option("resize-policy", {
      type: "string",
      choices: ["direct", "shorter-side"] as const,
      default: "direct",
      describe: "direct: stretch to input size; shorter-side: scale + center crop",
    })
    .option("batch-size", {
      type: "number",
      default: 64,
      describe: "images per inference batch",
    })
    .option("limit", {
      type: "number",
      describe: "use only the first N dataset images",
    })
    .strict()
    .fail((msg, err) => {
      throw err ?? new UsageError(msg ?? "invalid arguments");
    })
    .help();

  let args;
  try {
    args = await parser.parse();
  } catch (err) {
    if (err instanceof UsageError) {
      process.stderr.write(`config error: ${err.message}\n`);
      return 2;
    }
    throw err;
  }

  if (!Number.isInteger(args.augmentations) || args.augmentations < 0) {
    process.stderr.write(
      `config error: --augmentations must be a non-negative integer, got ${args.augmentations}\n`,
    );
    return 2;
  }
  if (args.limit !== undefined && (!Number.isInteger(args.limit) || args.limit < 1)) {
    process.stderr.write(`config error: --limit must be a positive integer, got ${args.limit}\n`);
    return 2;
  }
  if (!Number.isInteger(args["batch-size"]) || args["batch-size"] < 1) {
    process.stderr.write(
      `config error: --batch-size must be a positive integer, got ${args["batch-size"]}\n`,
    );
    return 2;
  }
  let seed: bigint;
  try {
    seed = BigInt(args.seed);
    if (seed < 0n) throw new Error("negative");
  } catch {
    process.stderr.write(
      `config error: --seed must be a non-negative integer, got ${JSON.stringify(args.seed)}\n`,
    );
    return 2;
  }
  if (!args.out.endsWith(".mwie")) {
    process.stderr.write(`config error: --out must end in .mwie, got ${args.out}\n`);
    return 2;
  }

  try {
    const backbone = resolveBackbone(args.backbone);
    const dataset = loadDataset(args.dataset, args.limit);
    const copies = 1 + args.augmentations;
    process.stderr.write(
      `embedding ${dataset.images.length} images × ${copies} ` +
        `(${args.trivial ? "trivial" : "augmented"} copies) with ${backbone.id} ` +
        `(dim ${backbone.dim})\n`,
    );
    const bytes = exportToFile(
      dataset,
      backbone,
      {
        augmentations: args.augmentations,
        trivial: args.trivial,
        seed,
        resizePolicy: args["resize-policy"] as ResizePolicy,
        batchSize: args["batch-size"],
      },
      args.out,
    );
    process.stderr.write(
      `wrote ${args.out}: ${dataset.images.length * copies} records, ${bytes} bytes\n`,
    );
    return 0;
  } catch (err) {
    if (err instanceof BackboneError) {
      process.stderr.write(`backbone error: ${err.message}\n`);
      return 3;
    }
    if (err instanceof DatasetError) {
      process.stderr.write(`data error: ${err.message}\n`);
      return 3;
    }
    throw err;
  }
}

class UsageError extends Error {}

if (require.main === module) {
  main(hideBin(process.argv)).then(
    (code) => {
      process.exitCode = code;
    },
    (err) => {
      process.stderr.write(`${err?.stack ?? err}\n`);
      process.exitCode = 1;
    },
  );
}
