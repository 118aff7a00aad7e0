/**
 * extract --index <file> --out <dir> [--stride N] [--workers N]
 *
 * Reads an extraction index, converts each clip to a KPS1 keypoint file, and
 * writes a dataset manifest alongside. Per-clip failures are reported on
 * stderr and the job continues.
 */

import { parseArgs } from "node:util";

import { runExtraction } from "./extract.js";
import { IndexError } from "./manifest.js";

function usage(): void {
  console.error(
    "usage: extract --index <file> --out <dir> [--stride N] [--workers N]",
  );
}

export async function main(argv: string[]): Promise<number> {
  let values;
  try {
    ({ values } = parseArgs({
      args: argv,
      options: {
        index: { type: "string" },
        out: { type: "string" },
        stride: { type: "string", default: "1" },
        workers: { type: "string", default: "4" },
      },
    }));
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    usage();
    return 2;
  }
  if (!values.index || !values.out) {
    usage();
    return 2;
  }
  const stride = Number(values.stride);
  const workers = Number(values.workers);
  if (!Number.isInteger(stride) || stride < 1 || !Number.isInteger(workers) || workers < 1) {
    console.error("error: --stride and --workers must be positive integers");
    return 2;
  }

  try {
    const summary = await runExtraction(values.index, values.out, {
      stride,
      workers,
      log: (line) => console.error(line),
    });
    console.log(
      `extracted ${summary.written.length} clip(s), ` +
        `${summary.failed.length} failed, ${summary.skipped.length} skipped`,
    );
    if (summary.manifestPath) {
      console.log(`manifest: ${summary.manifestPath}`);
    }
    return summary.written.length > 0 ? 0 : 1;
  } catch (err) {
    if (err instanceof IndexError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

const invokedDirectly =
  process.argv[1] !== undefined && import.meta.url.endsWith(process.argv[1].split("/").pop()!);
if (invokedDirectly) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
