import { spawn, execFileSync, type ChildProcess } from 'node:child_process';
import fs from 'node:fs';
import net from 'node:net';
import os from 'node:os';
import path from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { EnvClient } from '../src/client.js';

let workdir: string;
let dataDir: string;
let server: ChildProcess;
let port: number;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.listen(0, '127.0.0.1', () => {
      const addr = probe.address() as net.AddressInfo;
      probe.close(() => resolve(addr.port));
    });
    probe.on('error', reject);
  });
}

async function waitForPort(p: number, timeoutMs = 10000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  for (;;) {
    try {
      await new Promise<void>((resolve, reject) => {
        const sock = net.createConnection({ host: '127.0.0.1', port: p });
        sock.once('connect', () => sock.end(() => resolve()));
        sock.once('error', reject);
      });
      return;
    } catch {
      if (Date.now() > deadline) throw new Error('server did not come up');
      await new Promise((r) => setTimeout(r, 100));
    }
  }
}

beforeAll(async () => {
  workdir = fs.mkdtempSync(path.join(os.tmpdir(), 'gridflex-tcp-'));
  dataDir = path.join(workdir, 'data');
  execFileSync('python3', [
    '-m', 'gridflex.cli', 'gen-dataset',
    '--buildings', '2', '--hours', '48', '--seed', '3', '--out', dataDir,
  ]);
  port = await freePort();
  server = spawn('python3', [
    '-m', 'gridflex.cli', 'serve', '--data', dataDir, '--tcp', `127.0.0.1:${port}`,
  ]);
  await waitForPort(port);
});

afterAll(() => {
  server.kill();
  fs.rmSync(workdir, { recursive: true, force: true });
});

describe('TCP transport', () => {
  it('runs a short episode segment over a socket', async () => {
    const client = await EnvClient.connectTcp('127.0.0.1', port);
    try {
      const hello = await client.hello();
      expect(hello.action_dims).toEqual([3, 3]);
      let result = await client.reset();
      for (let i = 0; i < 10; i++) {
        result = await client.step([
          [0.1, 0.1, 0.1],
          [-0.1, -0.1, -0.1],
        ]);
        expect(result.done).toBe(false);
        expect(result.rewards).toHaveLength(2);
      }
    } finally {
      await client.close();
    }
  });

  it('gives each connection its own environment', async () => {
    const a = await EnvClient.connectTcp('127.0.0.1', port);
    const b = await EnvClient.connectTcp('127.0.0.1', port);
    try {
      await a.reset();
      await b.reset();
      const stepA = await a.step([
        [0.5, 0.5, 0.5],
        [0.5, 0.5, 0.5],
      ]);
      // b has not stepped; its next step is still the first hour and must
      // match a fresh session's first step exactly
      const stepB = await b.step([
        [0.5, 0.5, 0.5],
        [0.5, 0.5, 0.5],
      ]);
      expect(stepB.states).toEqual(stepA.states);
      expect(stepB.rewards).toEqual(stepA.rewards);
    } finally {
      await a.close();
      await b.close();
    }
  });
});
