// Minimal SMT-LIB front end over the z3 WASM build: reads a script
// from the path given as argv[2] (or stdin), evaluates it in one shot,
// prints the raw solver output, and tears the worker threads down so
// the process exits.
//
// Resolve the z3-solver package through NODE_PATH when it is vendored
// outside a node_modules directory on the default search path.
"use strict";

const fs = require("fs");

async function main() {
  const path = process.argv[2];
  const script = fs.readFileSync(path === undefined ? 0 : path, "utf8");
  const { init } = require("z3-solver");
  const { Z3, em } = await init();
  const cfg = Z3.mk_config();
  const ctx = Z3.mk_context(cfg);
  try {
    const out = await Z3.eval_smtlib2_string(ctx, script);
    process.stdout.write(out);
  } finally {
    Z3.del_context(ctx);
    Z3.del_config(cfg);
    em.PThread.terminateAllThreads();
  }
}

main().catch((e) => {
  process.stderr.write(String(e && e.stack ? e.stack : e) + "\n");
  process.exit(1);
});
