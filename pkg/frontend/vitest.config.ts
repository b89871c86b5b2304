import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    testTimeout: 600_000,
    hookTimeout: 600_000,
  },
});
